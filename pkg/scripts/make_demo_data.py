"""Generate a small synthetic dialog corpus and VAD lexicon for CLI demos.

Usage: python3 scripts/make_demo_data.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

PROMPT_WORDS = ["good", "to", "see", "you", "where", "are", "going", "what",
                "is", "that", "why", "so", "come", "with", "me", "can", "help"]
RESPONSE_TEMPLATES = [
    ("i am so happy today", "joy"),
    ("this is wonderful news", "joy"),
    ("i will hurt you", "anger"),
    ("you make me furious", "anger"),
    ("i am terrified now", "fear"),
    ("please do not leave me alone", "fear"),
    ("i did not expect that at all", "surprise"),
    ("you must be kidding me", "surprise"),
    ("i feel empty inside", "sadness"),
    ("nothing matters anymore", "sadness"),
    ("that smells awful", "disgust"),
    ("get that away from me", "disgust"),
]

LEXICON = {
    "happy": (0.95, 0.7, 0.8), "wonderful": (0.95, 0.8, 0.7),
    "hurt": (0.1, 0.85, 0.75), "furious": (0.05, 0.95, 0.9),
    "terrified": (0.05, 0.95, 0.1), "alone": (0.2, 0.4, 0.2),
    "expect": (0.6, 0.6, 0.5), "kidding": (0.7, 0.8, 0.4),
    "empty": (0.15, 0.2, 0.2), "matters": (0.4, 0.3, 0.4),
    "awful": (0.1, 0.6, 0.4), "away": (0.3, 0.6, 0.6),
    "news": (0.6, 0.5, 0.5), "leave": (0.25, 0.5, 0.35),
    "smells": (0.3, 0.4, 0.4), "kill": (0.05, 0.95, 0.85),
}


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_data")
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)
    lines = []
    for _ in range(200):
        n = rng.integers(3, 6)
        prompt = " ".join(rng.choice(PROMPT_WORDS, size=n))
        response, _ = RESPONSE_TEMPLATES[rng.integers(0, len(RESPONSE_TEMPLATES))]
        lines.append(f"{prompt}\t{response}")
    (out / "corpus.tsv").write_text("\n".join(lines) + "\n")
    lex_lines = [f"{w}\t{v}\t{a}\t{d}" for w, (v, a, d) in sorted(LEXICON.items())]
    (out / "lexicon.tsv").write_text("\n".join(lex_lines) + "\n")
    print(f"wrote {out}/corpus.tsv ({len(lines)} pairs) and {out}/lexicon.tsv "
          f"({len(LEXICON)} entries)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
