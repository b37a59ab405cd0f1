"""Writes the bundled benchmark corpus to data/corpus/.

Texts are built from a fixed word list with a seeded RNG, so rerunning the
script reproduces the committed files.
"""
import pathlib
import random

WORDS = """
the a an of to in on at by for with from about over under after before
during between through across near around city town village house garden
river street market school church forest bridge harbor castle station
library road hill valley field lake sea island coast mountain park square
people children friends workers students visitors families neighbours
teacher doctor farmer baker sailor writer painter driver mayor child
walk live work travel meet visit build stay run read write speak listen
watch open close carry bring find keep leave return begin finish wait
morning evening night summer winter spring autumn weather light music
story letter book song picture window door table chair bread water fire
nice little wonderful quiet busy old new small large green bright famous
lovely friendly ancient modern warm cold early late long short happy
always often rarely slowly quickly together there here again soon still
is was are were has had will would can could should may might
""".split()
PUNCT = [",", ",", ";", ":"]


def sentence(rng):
    n = rng.randint(6, 16)
    words = []
    for k in range(n):
        w = rng.choice(WORDS)
        if k == 0:
            w = w.capitalize()
        words.append(w)
        if 2 < k < n - 2 and rng.random() < 0.08:
            words.append(rng.choice(PUNCT))
    words.append(rng.choice([".", ".", ".", "!", "?"]))
    return words


def main():
    rng = random.Random(20240521)
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "corpus"
    out.mkdir(parents=True, exist_ok=True)
    for i in range(100):
        target = rng.randint(24, 160)
        tokens = []
        while len(tokens) < target:
            tokens.extend(sentence(rng))
        (out / f"text_{i:03d}.txt").write_text(" ".join(tokens) + "\n")


if __name__ == "__main__":
    main()
