"""Finite laboratory for partition hypotheses on quasi-orders and derived limits.

Modules: ``order`` (quasi-orders, tuple spaces, cofinal functions), ``simplicial``
(complexes, subdivision, Z/2 chains), ``colorings`` (cone and walk combinatorics),
``search`` (witness search and verification), ``homalg`` (inverse systems and
lim^n, with the sparse cancellation in ``reduction`` and exact Smith forms in
``snf``), ``trivialize`` (the formal calculus and cocycle trivialization), ``sset``
(nerve and Ex levels, the simplicial engine), ``io`` and ``cli``.
"""

__version__ = "0.1.0"
