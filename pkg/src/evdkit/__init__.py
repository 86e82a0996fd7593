"""Two-stage symmetric tridiagonalization and eigenvalues on multi-core CPUs.

Dense A is reduced to a band matrix by detached band reduction (bandwidth
``b`` decoupled from block size ``nb``), then to tridiagonal form by
pipelined bulge chasing; eigenvalues come from shifted QR iteration.
"""

from .band_reduction import DbrConfig, PanelUpdateSchedule, UpdateTask, dbr, recursive_panel_schedule, sbr, tridiag_direct
from .bulge import (
    BulgeWorkspace,
    ScheduleAudit,
    SweepProgress,
    chase_flop_count,
    chase_parallel,
    chase_serial,
    sweep_window_update,
)
from .flops import FlopCounter, flop_model
from .householder import HouseholderReflector, PanelFactors, compute_z, house, panel_qr
from .io import FormatError, read_symf, read_trid, write_symf, write_trid
from .matrix import (
    BandMatrix,
    OrthogonalAccumulator,
    SymmetricMatrix,
    TridiagonalMatrix,
    make_band,
    make_symmetric,
    similarity_residual,
    tol_orth,
    trace,
)
from .pipeline import PipelineResult, eigvalsh, tridiagonalize
from .rank2k import GemmBatchDescriptor, gemm_batched, syr2k_naive, syr2k_recursive, syr2k_schedule
from .tridiag_eig import EigResult, eig_qr, jacobi_oracle

__version__ = "0.1.0"
