"""Simulation of random-filtering sub-Nyquist samplers and sparse recovery.

Signal models (multitone, multiband, block-sparse), the random demodulator,
the modulated wideband converter and a block-convolution sampler, their
finite linear systems, greedy sparse solvers, and seeded experiments.
"""

__version__ = "0.1.0"

from .exceptions import DomainError, InvalidParameter, RankError, SubNyquistError
from .signals import (BlockSparseSignal, ChippingSequence, MultibandSignal, MultitoneSignal,
                      eval_multitone, gen_block_sparse, gen_chipping, gen_multiband,
                      gen_multitone, make_rng, multitone_grid, slice_bands, spectrum,
                      window_signal)
from .samplers import (BlockSamplerConfig, MwcConfig, RdConfig, block_convolve, block_sample,
                       mwc_sample, mwc_sample_multitone, rd_sample_analytic, rd_sample_grid)
from .systems import (BlockSystem, FourierBasis, MmvSystem, SmvSystem, build_block_system,
                      build_mwc_mmv, build_mwc_multitone_mmv, build_mwc_multitone_smv,
                      build_rd_multiband_smv, build_rd_smv, mmv_column_as_smv)
from .recovery import (RecoveryResult, lstsq, multitone_from_mmv, omp, solve_block, somp,
                       support_then_lsq, synthesize_block, synthesize_multiband, unweight,
                       unweight_and_synthesize_multitone, weight)
from .metrics import avg_squared_error, normalized_squared_error, summarize
from .experiments import (EXPERIMENTS, BasisMismatchConfig, BlockDemoConfig,
                          ChannelSweepConfig, ExperimentRecord, WindowingConfig,
                          exp_basis_mismatch, exp_block_demo, exp_channel_sweep,
                          exp_windowing)

__all__ = [name for name in dir() if not name.startswith("_")]
