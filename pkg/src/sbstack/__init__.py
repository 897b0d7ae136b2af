"""Tree-search MIMO decoders: sphere, stack, SB-Stack and soft-output variants."""

from .constellation import ConstellationSpec
from .lattice import (
    ComplexChannel,
    RealLatticeSystem,
    StbcGenerator,
    TriangularSystem,
    babai_point,
    brute_force_ml,
    qr_reduce,
    realify,
    shift_system,
    stbc_flatten,
    zf_point,
)
from .search import (
    RadiusPolicy,
    SearchRegionSpec,
    SearchStats,
    neighbor_stack_decode,
    sb_stack_decode,
    sphere_decode,
    stack_decode,
)
from .soft import CandidateList, ListPolicy, llr_exact, llr_maxlog, soft_sb_stack

__version__ = "0.1.0"
