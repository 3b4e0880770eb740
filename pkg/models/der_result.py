from dataclasses import dataclass


@dataclass
class DerResult:
    """Diarization error rate with its miss / false alarm / confusion split"""
    der: float
    md: float
    fa: float
    sc: float
    t_total: float
    t_md: float
    t_fa: float
    t_sc: float

    @classmethod
    def from_times(cls, t_total: float, t_md: float, t_fa: float, t_sc: float) -> "DerResult":
        pct = 100.0 / t_total
        return cls(
            der=(t_md + t_fa + t_sc) * pct,
            md=t_md * pct,
            fa=t_fa * pct,
            sc=t_sc * pct,
            t_total=t_total,
            t_md=t_md,
            t_fa=t_fa,
            t_sc=t_sc,
        )

    def as_row(self, file_id: str) -> str:
        return f"{file_id}\t{self.der:.2f}\t{self.md:.2f}\t{self.fa:.2f}\t{self.sc:.2f}\t{self.t_total:.2f}"
