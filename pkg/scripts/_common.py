import argparse
from pathlib import Path


def parser(description: str, default_out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", type=Path, default=Path("results") / default_out)
    p.add_argument("--no-plot", action="store_true", help="skip the matplotlib figure")
    return p


def outdir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt
