from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field


class ReportModel(BaseModel):
    """Reports serialise in declaration order; infinities as "Infinity" strings."""
    model_config = ConfigDict(ser_json_inf_nan="strings", arbitrary_types_allowed=True)


class FamilyMembershipReport(ReportModel):
    is_member: bool
    max_deficit_below_pi: float = Field(description="max over checked points of pi - h")
    max_graph_gap: float = Field(description="max over graph points of |h - pi|")
    tolerance: float
    points_checked: int
    witnesses: List[List[Any]] = Field(default_factory=list)


class EnvelopeReport(ReportModel):
    holds: bool
    phi_le_sigma: bool
    phi_eq_jsigma: bool
    worst_gap: float = Field(description="max over probes of phi - sigma where sigma is finite")
    probes: int
    witness: Optional[List[Any]] = None


class MajorizationCheck(ReportModel):
    holds: bool
    worst_violation: float = Field(description="max of pi - h over the checked points")
    witness: Optional[List[float]] = None
    points_checked: int = 0


class GateReport(ReportModel):
    h_ge_pi: MajorizationCheck
    jh_ge_pi: MajorizationCheck
    domain_condition_note: str
    tolerance: float

    @computed_field
    @property
    def holds(self) -> bool:
        return self.h_ge_pi.holds and self.jh_ge_pi.holds


class ExtractionResult(ReportModel):
    graph: List[List[float]] = Field(description="extracted nodes (x, x*) in C order")
    tol: float
    candidates: int = Field(description="nodes off the saturation mask with Jh - pi <= tol")
    fiber_minima: int = Field(description="candidates of least gap within their primal fiber")
    rejected: int = Field(default=0, description="fiber minima dropped by the monotone filter")
    rejected_witness: Optional[List[List[float]]] = Field(
        default=None, description="a dropped node and the extracted node it is not monotonically related to")
    substitutes: int = Field(default=0, description="other candidates standing in for fibers that lost their minima")
    monotone: bool
    hausdorff_to_reference: Optional[float] = None

    @computed_field
    @property
    def candidates_monotone(self) -> bool:
        """True when the fiber minima were monotone before any filtering."""
        return self.rejected == 0

    def operator(self):
        from src.core.operators.models import FiniteOperator
        return FiniteOperator.of((p[:len(p) // 2], p[len(p) // 2:]) for p in self.graph)


class BoundednessReport(ReportModel):
    block: str = Field(description="'range' (P2 bound, primal slices) or 'domain' (P1 bound, dual slices)")
    bounded: bool
    bound: Optional[float] = None
    window_limited: bool = False
    lipschitz_estimate: Optional[float] = None
    holds: bool
    note: str = ""


class PipelineReport(ReportModel):
    gate: GateReport
    extraction: Optional[ExtractionResult] = None
    range_bound: Optional[float] = Field(default=None, description="max norm over P2 D(h); also bounds P2 D(Jh)")
    range_inside_bound: bool = False
    fibers_required: int = 0
    fibers_covered: int = 0
    uncovered_fiber: Optional[List[float]] = None
    monotone: bool = False
    hausdorff_to_reference: Optional[float] = None
    hausdorff_limit: Optional[float] = None
    window_limited: bool = True
    holds: bool = False
    note: str = ""


class LemmaReport(ReportModel):
    lemma_id: str
    subject: str = ""
    inputs_digest: str
    holds: bool
    worst_margin: float
    witness: Optional[Any] = None
    note: str = ""
    skipped: bool = False
    expected_failure: bool = False

    @computed_field
    @property
    def passed(self) -> bool:
        """Regular checks pass when they hold; negative controls pass when they fail."""
        if self.skipped:
            return True
        return self.holds != self.expected_failure


class RunReport(ReportModel):
    command: List[str]
    config: Dict[str, Any]
    results: Any
    exit_code: int
    timings: Dict[str, float] = Field(default_factory=dict)
