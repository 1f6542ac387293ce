"""SU(r) tangle field theory toolkit.

Submodules: ``alcove`` (exact label arithmetic), ``tanglelang`` (tangle
words), ``cerf`` (move rewriting), ``holovar`` (holonomy solver), ``ammform``
(group-valued 2-forms), ``betti`` (Poincare series), ``corrcalc``
(correspondence calculus) and ``cli``.
"""

__version__ = "0.1.0"
