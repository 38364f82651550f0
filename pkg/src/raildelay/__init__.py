"""Railway cellular delay simulation, tree-ensemble modelling and reporting."""

__version__ = "0.1.0"
