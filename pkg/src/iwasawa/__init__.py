"""Structure invariants of torsion modules over Iwasawa-type filtered rings."""

__version__ = "0.1.0"
