"""The deterministic simulated user.

Interactive protocol: find the first character where the hypothesis
disagrees with the reference, validate everything before it, type exactly
the one corrected character (1 keystroke + 1 mouse action for the
placement), request a constrained re-decode, repeat; a hypothesis equal to
the reference is accepted with one validation click. When the hypothesis
extends past a fully-matched reference the user accepts the boundary
instead of typing (1 mouse action) and validates. Each round extends the
matched prefix by at least one character, so a sentence always terminates
within len(reference) + 1 rounds.

Static post-editing decodes once and overwrites left to right: one
keystroke per mismatched reference position plus one per excess hypothesis
character, one validation click.
"""

from dataclasses import dataclass, field

from ..errors import MthdError

MODES = ("static_post_edit", "interactive", "interactive_adaptive")


@dataclass
class InteractionTrace:
    source: str
    reference: str
    rounds: int
    keystrokes: int
    mouse_actions: int
    final_hypothesis: str

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "reference": self.reference,
            "rounds": self.rounds,
            "keystrokes": self.keystrokes,
            "mouse_actions": self.mouse_actions,
            "final_hypothesis": self.final_hypothesis,
        }


@dataclass
class EffortReport:
    modes: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "modes": {
                name: {
                    "ksmr": agg["ksmr"],
                    "keystrokes": agg["keystrokes"],
                    "mouse_actions": agg["mouse_actions"],
                    "reference_chars": agg["reference_chars"],
                    "sentences": [t.to_dict() for t in agg["traces"]],
                }
                for name, agg in self.modes.items()
            },
            "failures": self.failures,
        }


def _first_mismatch(hyp: str, ref: str) -> int:
    i = 0
    limit = min(len(hyp), len(ref))
    while i < limit and hyp[i] == ref[i]:
        i += 1
    return i


def simulate_sentence(engine, source: str, reference: str, mode: str) -> InteractionTrace:
    if not reference:
        raise MthdError("reference must be nonempty")
    hyp = engine.initial(source)
    rounds = 1
    keystrokes = 0
    mouse = 0

    if mode == "static_post_edit":
        for i in range(len(reference)):
            if i >= len(hyp) or hyp[i] != reference[i]:
                keystrokes += 1
        keystrokes += max(0, len(hyp) - len(reference))
        mouse += 1  # validate
        return InteractionTrace(source, reference, rounds, keystrokes, mouse, reference)

    if mode not in ("interactive", "interactive_adaptive"):
        raise MthdError(f"unknown simulation mode {mode!r}")

    while True:
        if hyp == reference:
            mouse += 1  # validate
            break
        i = _first_mismatch(hyp, reference)
        if i >= len(reference):
            # hypothesis over-generates past a fully matched reference:
            # accept the boundary (placement) and validate
            mouse += 2
            hyp = reference
            break
        prefix = reference[: i + 1]
        keystrokes += 1
        mouse += 1  # correction placement
        hyp = engine.constrained(source, prefix)
        rounds += 1
        if not hyp.startswith(prefix):
            raise MthdError(
                f"engine violated prefix compatibility: {prefix!r} -> {hyp!r}"
            )
    return InteractionTrace(source, reference, rounds, keystrokes, mouse, hyp)


def run_benchmark(make_engine, corpus, modes, adapt: bool = False) -> EffortReport:
    """Process the corpus per mode with a fresh engine each.

    With adapt=True every finished sentence is validated into the model
    before the next one (only meaningful for interactive modes; the mode
    is then reported as interactive_adaptive).
    """
    pairs = list(corpus)
    if not pairs:
        raise MthdError("empty_corpus")
    report = EffortReport()
    for mode in modes:
        if mode not in MODES:
            raise MthdError(f"unknown simulation mode {mode!r}")
        interactive = mode != "static_post_edit"
        learn = interactive and (adapt or mode == "interactive_adaptive")
        label = "interactive_adaptive" if learn else mode
        engine = make_engine()
        traces = []
        keystrokes = mouse = ref_chars = 0
        for idx, (source, reference) in enumerate(pairs):
            try:
                trace = simulate_sentence(
                    engine, source, reference,
                    "interactive" if interactive else "static_post_edit",
                )
                engine.validate(source, reference, learn=learn)
            except MthdError:
                raise
            except Exception as exc:
                report.failures.append({"mode": label, "sentence": idx, "error": str(exc)})
                continue
            traces.append(trace)
            keystrokes += trace.keystrokes
            mouse += trace.mouse_actions
            ref_chars += len(reference)
        report.modes[label] = {
            "ksmr": (keystrokes + mouse) / ref_chars if ref_chars else 0.0,
            "keystrokes": keystrokes,
            "mouse_actions": mouse,
            "reference_chars": ref_chars,
            "traces": traces,
        }
    return report
