from __future__ import annotations

from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer

from cantor.utils.helpers import rational_to_json


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, dict):
        return Fraction(int(value["num"]), int(value["den"]))
    if isinstance(value, float):
        raise ValueError("exact rationals cannot be built from floats")
    return Fraction(value)


ExactRational = Annotated[
    Fraction,
    BeforeValidator(_to_fraction),
    PlainSerializer(rational_to_json, return_type=dict),
]


class Report(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)


class RatioReport(Report):
    element: str
    vertex: str = Field(..., description="Fixed vertex the ratio is measured under")
    depth: int = Field(..., description="Truncation depth L")
    ratio: ExactRational = Field(..., description="Measure of moved depth-L words under the vertex, relative to its cylinder")
    resolved: bool = Field(..., description="True when deeper truncations cannot change the ratio")


class DegeneracyWitness(Report):
    vertex: str
    level: int
    ratio: ExactRational
    resolved: bool


class LevelSummary(Report):
    level: int
    fixed_nonidentity: int = Field(..., description="Fixed vertices whose section is not the identity to depth L")
    min_ratio: Optional[ExactRational] = None
    min_vertex: Optional[str] = None


class DegeneracyReport(Report):
    element: str
    max_level: int
    truncation_depth: int
    threshold: ExactRational
    witnesses: List[DegeneracyWitness] = Field(default_factory=list, description="Vertices whose ratio is below the threshold")
    levels: List[LevelSummary] = Field(default_factory=list)
    min_ratio_seen: Optional[ExactRational] = None
    min_vertex: Optional[str] = None
    verdict: Literal["refutes", "no_refutation"]
    summary: str


class SectionEvidence(Report):
    section: str = Field(..., description="Section label (state name or vertex word)")
    first_moved_level: Optional[int] = Field(None, description="Level of the first vertex the section moves")
    alpha: ExactRational = Field(..., description="Lower bound contributed by this section")


class NonDegeneracyCertificate(Report):
    element: str
    certified: Literal[True] = True
    alpha: ExactRational = Field(..., description="Certified lower bound on moved-measure ratios, in (0, 1]")
    method: Literal["PropIndexK", "AutomatonClosure"]
    evidence: List[SectionEvidence] = Field(default_factory=list)
    bound: Optional[int] = Field(None, description="M = max n_l (PropIndexK only)")
    k: Optional[int] = Field(None, description="Uniform first-moved level K (PropIndexK only)")
    state_bound: int

    def recompute_alpha(self) -> Fraction:
        if self.method == "PropIndexK":
            return Fraction(1, self.bound ** self.k) if self.k is not None else Fraction(1)
        return min((e.alpha for e in self.evidence), default=Fraction(1))


class NotCertified(Report):
    element: str
    certified: Literal[False] = False
    reason: str


class ReplayReport(Report):
    element: str
    alpha: ExactRational
    samples: int
    checked: int = Field(..., description="Sampled fixed vertices with a non-identity section")
    min_ratio: Optional[ExactRational] = None
    failures: List[str] = Field(default_factory=list)
    passed: bool


class HolonomyLevel(Report):
    level: int
    prefix: str
    witness: Optional[str] = Field(None, description="Shortlex-first moved vertex inside the cylinder, if any")


class HolonomyReport(Report):
    element: str
    point: str
    depth: int
    margin: int
    levels: List[HolonomyLevel]
    verdict: Literal["non_trivial", "trivial_at_scale", "none"]


class LqaWitness(Report):
    word: str
    u: str = Field(..., description="Cylinder on which g is not the identity")
    v: str = Field(..., description="Sub-cylinder on which g is the identity to depth L")
    depth: int


class LqaReport(Report):
    action: str
    radius: int
    depth: int
    margin: int
    witnesses: List[LqaWitness] = Field(default_factory=list)


class LabelledCylinder(Report):
    label: str = Field(..., description="Binary label k_1...k_i of the cylinder")
    cylinder: str
    element: Optional[str] = Field(None, description="Word chosen at this node (identity on the 0-child, moving the 1-child)")


class StabilizerPoint(Report):
    label: str
    prefix: str
    stabilizer_size: int


class Separator(Report):
    left: str
    right: str
    word: str
    fixes: str = Field(..., description="Label of the point whose stabilizer contains the word")


class DistinctStabilizerReport(Report):
    action: str
    n: int
    radius: int
    depth: int
    margin: int
    cylinders: List[LabelledCylinder] = Field(default_factory=list)
    points: List[StabilizerPoint] = Field(default_factory=list)
    separators: List[Separator] = Field(default_factory=list)


class DensityValue(Report):
    level: int
    ratio: ExactRational
    resolved: bool


class DensityReport(Report):
    element: str
    point: str
    depth: int
    values: List[DensityValue]


class ClassFrequency(Report):
    hash: str
    vertices: int
    count: int
    frequency: ExactRational
    representative: Dict[str, Any]


class IrsSampleReport(Report):
    action: str
    samples: int
    depth: int
    radius: int
    seed: int
    classes: List[ClassFrequency]
    max_frequency: ExactRational

    def class_count(self) -> int:
        return len(self.classes)


class AtomicityRow(Report):
    radius: int
    classes: int
    max_frequency: ExactRational


class AtomicityReport(Report):
    action: str
    threshold: ExactRational
    rows: List[AtomicityRow]
    flag: Literal["atom candidate", "non-atomic trend", "undetermined"]
    note: str = "empirical at finite scale"


class MetricReport(Report):
    r_max: int
    distance: Optional[ExactRational] = None
    indistinguishable: bool = False


class ChabautyReport(Report):
    action: str
    include: List[str]
    exclude: List[str]
    samples: int
    depth: int
    radius: int
    seed: int
    mass: ExactRational = Field(..., description="Fraction of sampled points whose stabilizer ball meets the basic set")


class ChainReport(Report):
    verdict: Literal["compatible", "incompatible", "undetermined"]
    horizon: int
    interleaving: List[List[int]] = Field(default_factory=list, description="Pairs (i_l, i'_l) of interleaved prefix lengths")
    obstruction: Optional[Dict[str, Any]] = None
    summary: str


class FixedDensityInterval(Report):
    level: int
    lower: ExactRational
    upper: ExactRational
    width: ExactRational
    bound: ExactRational = Field(..., description="1 - 4 / n_{l+1}")
    above_bound: bool


class FactResult(Report):
    name: str
    claim: str
    passed: bool
    detail: Optional[str] = None


class CatalogSummary(Report):
    name: str
    description: str
    index: Dict[str, Any]
    generators: List[str]
    params: Dict[str, Any] = Field(default_factory=dict)
