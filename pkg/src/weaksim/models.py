"""Report model for the weak measurement toolkit"""

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

from .config import REPORT_SCHEMA_VERSION, TEXT_SIGNIFICANT_DIGITS
from .montecarlo import Estimate, ExactReadout, StrongStatistics, SweepResult
from .utils import format_complex, format_number
from .weakvalues import ParadoxReport


def _num(value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    return format_number(value, TEXT_SIGNIFICANT_DIGITS)


def _cnum(pair: Dict[str, float]) -> str:
    return format_complex(complex(pair["re"], pair["im"]), TEXT_SIGNIFICANT_DIGITS)


@dataclass
class Report:
    """Everything one CLI command produces; `to_dict` is the machine format"""

    command: str
    scenario: Dict[str, Any]
    weak_values: List[Dict[str, Any]] = field(default_factory=list)
    channels: List[Dict[str, Any]] = field(default_factory=list)
    paradox: Optional[ParadoxReport] = None
    exact: List[ExactReadout] = field(default_factory=list)
    estimates: List[Estimate] = field(default_factory=list)
    sweep: Optional[SweepResult] = None
    strong: Optional[StrongStatistics] = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to dictionary for JSON serialization"""
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": self.command,
            "parameters": self.parameters,
            "scenario": self.scenario,
            "weak_values": self.weak_values,
            "channels": self.channels,
            "paradox": self.paradox.to_dict() if self.paradox else None,
            "exact": [r.to_dict() for r in self.exact],
            "estimates": [e.to_dict() for e in self.estimates],
            "sweep": self.sweep.to_dict() if self.sweep else None,
            "strong": self.strong.to_dict() if self.strong else None,
            "notes": self.notes,
        }

    def to_text(self, generated_at: Optional[datetime] = None) -> str:
        """Human-readable rendering; numbers at 12 significant digits"""
        generated_at = generated_at or datetime.now()
        s = self.scenario
        lines = [
            f"weaksim {self.command} report",
            "=" * 50,
            f"⏰ Generated: {generated_at.strftime('%Y-%m-%d %H:%M:%S')}",
            f"📄 Scenario: {s['name']} (dim {s['dim']}, source {s['source']})",
            f"   <f|U|in> = {_cnum(s['transition_amplitude'])}",
            f"   prob(in -> f) = {_num(s['prob_transition'])}",
        ]
        for meter in s["meters"]:
            lines.append(f"   meter {meter['label']}: g = {_num(meter['g'])}, sigma = {_num(meter['sigma'])}")

        if self.channels:
            lines += ["", "🔀 Channels:"]
            for ch in self.channels:
                lines.append(
                    f"   {ch['label']}: amplitude {_cnum(ch)}, "
                    f"prob_intermediate {_num(ch['prob_intermediate'])}, "
                    f"prob_via_channel {_num(ch['prob_via_channel'])}"
                )

        if self.weak_values:
            lines += ["", "📐 Weak values:"]
            for wv in self.weak_values:
                lines.append(f"   ({wv['label']})_w = {_cnum(wv)}  [{wv['verdict']}]")

        if self.paradox:
            p = self.paradox.to_dict()
            lines += ["", f"⚖️  Additivity check (zero_tol {_num(p['zero_tol'])}):"]
            for op in p["operators"]:
                lines.append(f"   ({op['label']})_w = {_cnum(op)}  [{op['verdict']}]")
            lines.append(f"   contradiction: {'YES' if p['contradiction'] else 'no'}")

        if self.exact:
            lines += ["", "🎯 Exact pointer readouts:"]
            for r in self.exact:
                d = r.to_dict()
                lines.append(
                    f"   {d['label']}: <Q> = {_num(d['mean_q'])}, <P> = {_num(d['mean_p'])}, "
                    f"<Q>/g = {_num(d['mean_q_over_g'])}, acceptance {_num(d['acceptance'])}"
                )

        if self.estimates:
            lines += ["", "🎲 Monte Carlo estimates:"]
            for e in self.estimates:
                lines.append(
                    f"   {e.label}: mean_q = {_num(e.mean_q)} ± {_num(e.std_error)}, "
                    f"<Q>/g = {_num(e.weak_value_estimate)}, accepted {e.n_accepted}/{e.n_trials} "
                    f"(rate {_num(e.acceptance_rate)}, expected {_num(e.expected_acceptance)}) "
                    f"[{e.verdict.value}, k={_num(e.zero_test_k)}]"
                )

        if self.sweep:
            d = self.sweep.to_dict()
            lines += ["", f"📉 Convergence sweep for {d['meter']} ({d['mode']}):", "   g                 <Q>/g"]
            for row in d["rows"]:
                extra = f"  ± {_num(row['std_error'])}" if "std_error" in row else ""
                lines.append(f"   {_num(row['g']):<17} {_num(row['mean_q_over_g'])}{extra}")
            lines.append(f"   extrapolated (g -> 0): {_num(d['extrapolated'])}")
            if d["extrapolated_std_error"] is not None:
                lines.append(f"   extrapolated std error: {_num(d['extrapolated_std_error'])}")
            lines.append(f"   curvature: {_num(d['fit_curvature'])}, fit residual: {_num(d['fit_residual'])}")

        if self.strong:
            d = self.strong.to_dict()
            lines += ["", f"💥 Strong measurement then postselection ({d['n_trials']} trials):"]
            for ch in d["channels"]:
                lines.append(
                    f"   {ch['label']}: frequency {_num(ch['frequency'])} (Born {_num(ch['prob_intermediate'])}), "
                    f"joint {_num(ch['joint_frequency'])} (prob_via_channel {_num(ch['prob_via_channel'])})"
                )
            lines.append(
                f"   strong acceptance {_num(d['strong_acceptance'])} "
                f"(expected {_num(d['strong_acceptance_expected'])}) vs prob(in -> f) {_num(d['prob_transition'])}"
            )

        if self.notes:
            lines += ["", "📝 Notes:"]
            lines += [f"   • {note}" for note in self.notes]
        return "\n".join(lines) + "\n"
