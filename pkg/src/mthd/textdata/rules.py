"""Antiquation rules: ordered character rewrites that manufacture an old
spelling from modern text.

Rule file format, one rule per line::

    pattern <TAB> replacement <TAB> probability

``#`` starts a comment. Patterns are literals plus the anchors ``^`` (word
start) and ``$`` (word end); anchors anywhere else are rejected. Rules are
applied in listed order, scanning each word left to right without overlap;
later rules see the output of earlier ones.
"""

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import RuleParseError

_WS_SPLIT = re.compile(r"(\s+)")


@dataclass(frozen=True)
class Rule:
    pattern: str
    replacement: str
    probability: float
    anchor_start: bool = False
    anchor_end: bool = False

    def matches_at(self, word: str, pos: int) -> bool:
        if self.anchor_start and pos != 0:
            return False
        if not word.startswith(self.pattern, pos):
            return False
        if self.anchor_end and pos + len(self.pattern) != len(word):
            return False
        return True


def _parse_rule(raw: str, line_no: int) -> Rule:
    parts = raw.split("\t")
    if len(parts) != 3:
        raise RuleParseError(
            f"expected 'pattern<TAB>replacement<TAB>probability', got {raw!r}",
            line_no,
        )
    pattern, replacement, prob_s = parts
    try:
        prob = float(prob_s)
    except ValueError:
        raise RuleParseError(f"bad probability {prob_s!r}", line_no) from None
    if not 0.0 <= prob <= 1.0:
        raise RuleParseError(f"probability {prob} outside [0, 1]", line_no)
    anchor_start = pattern.startswith("^")
    if anchor_start:
        pattern = pattern[1:]
    anchor_end = pattern.endswith("$")
    if anchor_end:
        pattern = pattern[:-1]
    if not pattern:
        raise RuleParseError("empty pattern", line_no)
    if "^" in pattern or "$" in pattern:
        raise RuleParseError(
            "anchors are only valid at the pattern edges", line_no
        )
    return Rule(pattern, replacement, prob, anchor_start, anchor_end)


def parse_rules(text: str) -> list:
    rules = []
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].rstrip("\r\n")
        if not line.strip():
            continue
        rules.append(_parse_rule(line, line_no))
    return rules


def load_rules(path) -> list:
    return parse_rules(Path(path).read_text(encoding="utf-8"))


def default_rules() -> list:
    """The versioned rule set shipped with the package."""
    text = (
        resources.files("mthd").joinpath("assets/antiquation_rules_v1.txt")
        .read_text(encoding="utf-8")
    )
    return parse_rules(text)


def apply_rules_to_word(word: str, rules, rng) -> str:
    """All rules in order, each scanning left to right, non-overlapping.

    Probabilistic rules (0 < p < 1) consume exactly one PRNG draw per
    matched occurrence, so output is deterministic for a fixed stream.
    """
    for rule in rules:
        out = []
        pos = 0
        plen = len(rule.pattern)
        while pos < len(word):
            if rule.matches_at(word, pos):
                apply = (
                    rule.probability >= 1.0
                    or (rule.probability > 0.0 and rng.next_float() < rule.probability)
                )
                if apply:
                    out.append(rule.replacement)
                else:
                    out.append(word[pos : pos + plen])
                pos += plen
            else:
                out.append(word[pos])
                pos += 1
        word = "".join(out)
    return word


def antiquate_line(line: str, rules, rng) -> str:
    """Apply the rule set word by word, preserving whitespace runs."""
    parts = _WS_SPLIT.split(line)
    return "".join(
        part if part.strip() == "" else apply_rules_to_word(part, rules, rng)
        for part in parts
    )
