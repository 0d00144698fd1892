"""The per-run record shared by all learners and the experiment harness."""
from dataclasses import asdict, dataclass, field, fields

CSV_COLUMNS = (
    "algorithm", "scenario", "n", "seed", "labels_used", "excess_risk",
    "c_total", "c_bar_total", "events_held", "output_h", "wall_ms",
)


@dataclass
class RunReport:
    algorithm: str
    n: int
    seed: int
    output_h: int
    excess_risk: float
    labels_used: int
    c_total: float
    scenario: str = ""
    c_bar_total: float = None
    events_held: bool = None
    # per checkpoint (RobustCAL) or per epoch (CALruption)
    labels_trace: list = field(default_factory=list)
    c_epochs: list = field(default_factory=list)
    events: dict = field(default_factory=dict)
    hstar_trace: list = field(default_factory=list)
    gap_trajectory: list = field(default_factory=list)
    invariants: dict = field(default_factory=dict)
    wall_ms: float = 0.0

    def __post_init__(self):
        if self.excess_risk < 0:
            raise ValueError("excess risk must be non-negative")
        if self.labels_used > self.n:
            raise ValueError("a run cannot use more labels than rounds")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in doc.items() if k in names})

    def csv_row(self):
        row = {}
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            row[name] = "" if value is None else value
        return row
