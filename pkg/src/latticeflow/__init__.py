"""latticeflow: exactly-looping animations of elliptic functions.

The modular flow t -> (e^t x, e^-t y) acts on unit-area plane lattices;
hyperbolic integer matrices give lattices the flow returns to after a finite
period t0. Evaluating an elliptic function on the flowing lattice and domain
coloring the result yields animations that loop exactly.
"""

from .colorize import (
    ColorScheme,
    Palette,
    builtin_palette,
    color_value,
    colorize_values,
    load_palette,
    sample_palette,
)
from .elliptic import (
    POLE,
    LatticeInvariants,
    TruncationSpec,
    eisenstein,
    invariants_of,
    is_pole,
    jacobi_cn,
    modulus_from_tau,
    quarter_period,
    sigma_w,
    wp,
    wp_direct,
    wp_prime,
    wp_prime_direct,
    zeta_w,
)
from .encode import write_gif, write_png
from .errors import LatticeFlowError
from .expr import EllipticExpr, RationalFunction, eval_expr, format_expr, parse_expr
from .lattice import (
    Lattice,
    PeriodicOrbit,
    UnimodularMatrix,
    flow,
    make_lattice,
    reduce_tau,
    solve_periodic_orbit,
    verify_closure,
)
from .render import Image, RenderJob, Viewport, render_animation, render_frame
from .validate import run_suites

__all__ = [
    "ColorScheme",
    "EllipticExpr",
    "Image",
    "Lattice",
    "LatticeFlowError",
    "LatticeInvariants",
    "POLE",
    "Palette",
    "PeriodicOrbit",
    "RationalFunction",
    "RenderJob",
    "TruncationSpec",
    "UnimodularMatrix",
    "Viewport",
    "builtin_palette",
    "color_value",
    "colorize_values",
    "eisenstein",
    "eval_expr",
    "flow",
    "format_expr",
    "invariants_of",
    "is_pole",
    "jacobi_cn",
    "load_palette",
    "make_lattice",
    "modulus_from_tau",
    "parse_expr",
    "quarter_period",
    "reduce_tau",
    "render_animation",
    "render_frame",
    "run_suites",
    "sample_palette",
    "sigma_w",
    "solve_periodic_orbit",
    "verify_closure",
    "wp",
    "wp_direct",
    "wp_prime",
    "wp_prime_direct",
    "write_gif",
    "write_png",
    "zeta_w",
]
