"""
Validation of the JSON documents the tool reads and writes.

Models forbid unknown keys, so a schedule segment carrying a diagonal
(beta) control entry fails validation.
"""

from typing import Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator


class SchemaError(ValueError):
    """A document does not match its schema."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra='forbid')


class GammaEntry(_Strict):
    i: int = Field(ge=0)
    j: int = Field(ge=0)
    re: float
    im: float = 0.0


class SegmentDocument(_Strict):
    duration: float = Field(ge=0)
    alpha: List[float]
    gamma: List[GammaEntry] = Field(default_factory=list)
    label: str = ''


class FixedBetaEntry(_Strict):
    i: int = Field(ge=0)
    j: int = Field(ge=0)
    value: float


class ScheduleHeader(_Strict):
    n: int = Field(ge=1)
    J: int = Field(ge=2)
    pairing: List[Tuple[int, int]]
    fermi_position: int = Field(ge=0)
    fixed_beta: List[FixedBetaEntry] = Field(default_factory=list)
    fixed_description: str = ''

    @model_validator(mode='after')
    def check_levels(self):
        if self.J != 2 * self.n:
            raise ValueError(f"J={self.J} does not match n={self.n}")
        if len(self.pairing) != self.n:
            raise ValueError(f"expected {self.n} pairs, got {len(self.pairing)}")
        for entry in self.fixed_beta:
            if entry.i >= self.J or entry.j >= self.J:
                raise ValueError(f"fixed beta ({entry.i}, {entry.j}) outside {self.J} levels")
        return self


class ScheduleDocument(_Strict):
    header: ScheduleHeader
    segments: List[SegmentDocument]

    @model_validator(mode='after')
    def check_controls(self):
        J = self.header.J
        for position, segment in enumerate(self.segments):
            if len(segment.alpha) != J:
                raise ValueError(f"segment {position}: alpha has {len(segment.alpha)} entries, expected {J}")
            for entry in segment.gamma:
                if entry.i == entry.j or entry.i >= J or entry.j >= J:
                    raise ValueError(f"segment {position}: invalid tunneling pair ({entry.i}, {entry.j})")
        return self


class ResidualEntry(_Strict):
    index: int = Field(ge=0)
    gate: str
    residual: float = Field(ge=0)


class ScheduleSummary(_Strict):
    segment_count: int = Field(ge=0)
    pulse_count: int = Field(ge=0)
    total_duration: float = Field(ge=0)
    header: Optional[ScheduleHeader] = None
    segments: Optional[List[SegmentDocument]] = None


class ReportDocument(_Strict):
    mode: Literal['verify-diagrams', 'simulate', 'compile-only']
    circuit: str
    n_qubits: int = Field(ge=1)
    coupling: float
    tolerances: Dict[str, float]
    fidelity: Optional[float] = Field(default=None, ge=0, le=1)
    state_fidelity: Optional[float] = Field(default=None, ge=0, le=1)
    leakage: Optional[float] = Field(default=None, ge=0, le=1)
    residuals: List[ResidualEntry] = Field(default_factory=list)
    schedule: Optional[ScheduleSummary] = None
    passed: bool = Field(alias='pass')
    generated_at: str


class TermEntry(_Strict):
    indices: List[int]
    re: float
    im: float = 0.0


class HamiltonianDocument(_Strict):
    J: int = Field(ge=1)
    alpha: List[float] = Field(default_factory=list)
    beta: List[TermEntry] = Field(default_factory=list)
    gamma: List[TermEntry] = Field(default_factory=list)
    one_body: List[TermEntry] = Field(default_factory=list)
    two_body: List[TermEntry] = Field(default_factory=list)
    offset: float = 0.0

    @model_validator(mode='after')
    def check_shapes(self):
        if self.alpha and len(self.alpha) != self.J:
            raise ValueError(f"alpha must have length J={self.J}")
        for name, width in (('beta', 2), ('gamma', 2), ('one_body', 2), ('two_body', 4)):
            for entry in getattr(self, name):
                if len(entry.indices) != width:
                    raise ValueError(f"{name} entries take {width} indices, got {entry.indices}")
        return self


def _validate(model, data: Mapping, what: str):
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise SchemaError(f"invalid {what}: {exc}") from exc


def validate_schedule_document(data: Mapping) -> ScheduleDocument:
    """Raises SchemaError unless data is a schedule with field and tunneling controls only."""
    return _validate(ScheduleDocument, data, 'schedule')


def validate_report_document(data: Mapping) -> ReportDocument:
    return _validate(ReportDocument, data, 'report')


def validate_hamiltonian_document(data: Mapping) -> HamiltonianDocument:
    return _validate(HamiltonianDocument, data, 'Hamiltonian')
