"""Linear and mixed-binary feasibility solver with checkable answers."""

from .lpdump import dump, dumps, load, loads
from .model import (EQ, GE, LE, TAU_CERT, TAU_FEAS, TAU_INT, Certificate, LinearProgram,
                    MilfProblem, SolveResult, SolveStats, Status)
from .solve import lp_feasible, milf_feasible
from .verify import certificate_gap, max_violation, verify_certificate, verify_milf_witness, verify_witness

__all__ = [
    "EQ", "GE", "LE", "TAU_CERT", "TAU_FEAS", "TAU_INT",
    "Certificate", "LinearProgram", "MilfProblem", "SolveResult", "SolveStats", "Status",
    "lp_feasible", "milf_feasible",
    "certificate_gap", "max_violation", "verify_certificate", "verify_milf_witness", "verify_witness",
    "dump", "dumps", "load", "loads",
]
