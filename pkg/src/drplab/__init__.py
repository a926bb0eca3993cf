"""Nonlinear differential repetitive processes: simulation, stability certificates, ILC and Picard iteration."""

from .engine import BoundarySpec, RunRecord, estimate_rate, run_drp
from .ilc import ILCProblem, ilc_certificate, run_ilc
from .linearize import LTVQuadruple, linearize_at_origin
from .ltv import alpha_certificate, gelfand_estimate
from .passop import DRPSystem, integrate_pass
from .picard import PicardProblem, run_picard
from .signals import Signal, TimeGrid, VectorSequence, e_lambda_norm

__version__ = "0.1.0"
