"""grsol: symbolic curvature and soliton analysis for coordinate charts.

The package is organized as

* :mod:`grsol.symcore`   - exact expression kernel (simplify/diff/probe),
* :mod:`grsol.geometry`  - charts, tensors, curvature, derivative operators,
* :mod:`grsol.charts`    - bundled and randomized test charts,
* :mod:`grsol.fluid`     - perfect-fluid states, field equations, eras,
* :mod:`grsol.solitons`  - soliton residuals, constant solving, dichotomies,
* :mod:`grsol.audit`     - two-sided verification of curvature identities,
* :mod:`grsol.oracle`    - independent finite-difference numeric checks,
* :mod:`grsol.cli`       - the ``grsol`` command-line front end.
"""

from .symcore import (
    Coord,
    Exp,
    Expr,
    Func,
    Power,
    Product,
    Rational,
    Sum,
    as_expr,
    diff,
    eval_numeric,
    is_zero,
    parse_expr,
    simplify,
    solve_linear,
    substitute,
    symbol,
    to_text,
)

__version__ = "0.1.0"

__all__ = [
    "Coord", "Exp", "Expr", "Func", "Power", "Product", "Rational", "Sum",
    "as_expr", "diff", "eval_numeric", "is_zero", "parse_expr", "simplify",
    "solve_linear", "substitute", "symbol", "to_text", "__version__",
]
