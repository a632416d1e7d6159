"""Freezes NLTK Porter stems (original 1980 rules) for a word list.

Writes tests/fixtures/porter_stems.tsv as word<TAB>stem lines.
"""
from pathlib import Path

from nltk.stem.porter import PorterStemmer

WORDS = """
caresses ponies ties caress cats feed agreed plastered bled motoring sing conflated troubled sized hopping
tanned falling hissing fizzed failing filing happy sky relational conditional rational valenci hesitanci
digitizer conformabli radicalli differentli vileli analogousli vietnamization predication operator feudalism
decisiveness hopefulness callousness formaliti sensitiviti sensibiliti triplicate formative formalize
electriciti electrical hopeful goodness revival allowance inference airliner gyroscopic adjustable
defensible irritant replacement adjustment dependent adoption homologou communism activate angulariti
homologous effective bowdlerize probate rate cease controll roll generalizations oscillators running runs
ran jumped jumping cats was is be being the a an generously university universal organization organs
agreement argued arguing abilities ability fence fences jumps quickly studies studying died dying lying
tying cries crying happiness relate relativity relativities probing meetings meeting sensational
traditional traditionally sky skies news dogs dog's as us is has gas this his
""".split()


def main():
    stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    out = Path(__file__).resolve().parent.parent / "fixtures" / "porter_stems.tsv"
    seen = []
    for w in WORDS:
        if w not in seen:
            seen.append(w)
    out.write_text("".join(f"{w}\t{stemmer.stem(w, to_lowercase=False)}\n" for w in seen))
    print(f"wrote {len(seen)} stems")


if __name__ == "__main__":
    main()
