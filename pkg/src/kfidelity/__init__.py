"""Momentum-resolved fidelity of two-band and Dirac lattice Hamiltonians."""

from .config import ScanJob, format_config, parse_config
from .correspondence import (
    AntipodalWitness, CriticalLine, antipodal_lambda, counterexample_suite, critical_line, zero_fidelity_pairs,
)
from .errors import (
    ConfigError, GaplessError, KFidelityError, LinearityError, ModelError, NotAntipodalError, VerificationError,
)
from .fidelity import (
    SENTINEL, GibbsContext, fidelity_gibbs, fidelity_ising_k, fidelity_ising_total, fidelity_map, fidelity_oracle,
    fidelity_product, fidelity_pure,
)
from .grid import Grid2D, GridSpec, default_grid
from .io import write_grid_csv, write_pgm
from .jobs import run_job
from .models import HVector, ModelSpec, band_energies, catalog, eval_h, get_model
from .topology import (
    chern_number, gap_map, gapless_on_segment, tri_antipodality, tri_masses, z2_strong, zero_exponent,
)

__version__ = "0.1.0"
