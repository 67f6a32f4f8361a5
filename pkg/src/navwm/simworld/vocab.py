"""Closed word-level vocabulary and whitespace tokenizer for instructions."""

from __future__ import annotations

from importlib import resources

PAD_ID = 0
UNK_ID = 1

# object class names indexed by class id; class 0 is the wall class and
# never appears in instructions
OBJECT_NAMES = [None, "chair", "table", "lamp", "plant", "sofa", "shelf", "crate"]


def object_name(class_id: int) -> str:
    if not 1 <= class_id < len(OBJECT_NAMES):
        raise ValueError(f"no instruction name for object class {class_id}; "
                         f"extend the vocabulary for more than {len(OBJECT_NAMES)} classes")
    return OBJECT_NAMES[class_id]


class Tokenizer:
    """Whitespace word tokenizer over a fixed one-token-per-line vocabulary."""

    def __init__(self, words: list[str]):
        if len(words) > 128:
            raise ValueError(f"vocabulary too large ({len(words)} > 128 tokens)")
        self.words = list(words)
        self.ids = {w: i for i, w in enumerate(words)}

    @classmethod
    def from_file(cls, path) -> "Tokenizer":
        with open(path, encoding="utf-8") as fh:
            return cls([line.strip() for line in fh if line.strip()])

    @classmethod
    def default(cls) -> "Tokenizer":
        text = resources.files("navwm.simworld").joinpath("vocab.txt").read_text("utf-8")
        return cls([line.strip() for line in text.splitlines() if line.strip()])

    def __len__(self):
        return len(self.words)

    def encode(self, text: str) -> list[int]:
        return [self.ids.get(w, UNK_ID) for w in text.split()]

    def decode(self, ids) -> str:
        return " ".join(self.words[i] for i in ids if i != PAD_ID)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.words) + "\n")
