"""Cat-state Ramsey interferometry for sensing the frequency shift of a bosonic mode."""

__version__ = "0.1.0"

from catsense.phase_space import (
    CatComponent,
    CatState,
    cat_normalization,
    coherent_overlap,
    displace_label,
    parity_label,
    rotate_label,
)
from catsense.analytic import (
    DecoheredFieldState,
    ProtocolConfig,
    bias_point,
    damp_and_displace,
    evolve_and_displace,
    pg_approx_damped,
    pg_approx_ideal,
    prepare_cat,
    ramsey_pg_damped,
    ramsey_pg_ideal,
    snr,
)
