"""LDPC belief propagation with check-node schedules scored by scheduled density evolution."""

from .channel import ChannelSpec, channel_densities, channel_ldensity, sample_llr
from .de import (EdgeDensityState, TauConfig, TauEvaluator, average_entropy, de_cn_step,
                 de_curve, gap, tau)
from .decoder import (DecodeResult, ScheduleError, ScheduleSequence, decode, decode_batch,
                      flood_iteration, hard_decision, serial_cn_step, syndrome_ok)
from .density import GridSpec, LDensity, cconv, delta_inf, delta_zero, entropy, vconv
from .graph import (GraphFormatError, TannerGraph, expand_qc, from_check_lists, from_dense,
                    load_code, parse_alist, random_regular, to_alist)
from .sim import ExperimentConfig, ExperimentReport, run_average_nmp, run_trajectory
from .ssbp import (SsbpConfig, SsbpTrace, exchange, lowest_degree,
                   lowest_punctured_highest_degree, random_order, row_order, ssbp)

__version__ = "0.1.0"
