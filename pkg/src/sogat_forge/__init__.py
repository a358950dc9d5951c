"""sogat-forge: identity-type synthesis for second-order generalized
algebraic theories with declared homotopy relations."""

__version__ = "0.1.0"
