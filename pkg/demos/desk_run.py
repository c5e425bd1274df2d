"""Full pipeline on a synthetic AD-like corpus: synth, extract, stats, cv, train, predict.

Usage: python3 demos/desk_run.py [WORKDIR]

Takes about two minutes on one core; most of it is feature extraction.
"""
import sys
import tempfile
from pathlib import Path

from adspeech.cli import main


def step(*argv):
    argv = [str(a) for a in argv]
    print(f"\n$ adspeech {' '.join(argv)}")
    code = main(argv)
    if code:
        sys.exit(code)


def run(work: Path):
    corpus, feats = work / "corpus", work / "features.csv"
    step("synth", "--n", 48, "--effect", "adlike", "--ad-ceiling", 1, "--out", corpus)
    step("extract", corpus, "--out", feats, "--fit", work / "lexicon.json")
    step("stats", feats, "--out-dir", work / "stats", "--drop-outliers", "ad30:1,lexlow:3")
    step("cv", feats, "--model", "all", "--set", "pros,vq,lex,all", "--out", work / "cv_class")
    step("cv", feats, "--model", "lrsgd", "--task", "reg", "--set", "all", "--drop-outliers", "ad30:1,lexlow:3")
    step("train", feats, "--model", "rf", "--set", "all", "--out", work / "rf.json")
    step("predict", work / "rf.json", feats, "--out", work / "predictions.csv")
    print(f"\nartifacts in {work}")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        run(Path(sys.argv[1]))
    else:
        run(Path(tempfile.mkdtemp(prefix="adspeech-demo-")))
