"""Recompute F and AER from the published precision/recall pairs of the
alignment benchmark and show the gap to the printed values."""
from silverproj.align import f_measure

ROWS = [
    ("fast-align", 53.9, 51.4, 52.6, 47.4),
    ("mBERT", 78.5, 54.5, 64.4, 35.6),
    ("GBv4", 85.6, 55.4, 67.3, 32.7),
    ("XLM-R", 78.6, 48.4, 59.9, 40.1),
    ("L64K", 81.5, 55.5, 66.0, 34.0),
    ("L128K", 80.0, 54.5, 64.9, 35.1),
    ("mBERT ft", 81.9, 61.2, 70.0, 30.0),
    ("GBv4 ft", 86.9, 59.7, 70.7, 29.3),
    ("XLM-R ft", 90.3, 60.2, 72.2, 27.8),
    ("L64K ft", 84.9, 60.9, 70.9, 29.1),
    ("L128K ft", 80.3, 58.7, 67.8, 32.2),
    ("XLM-R ft.s", 92.5, 65.6, 76.7, 23.3),
    ("L128K ft.s", 93.7, 64.6, 76.5, 23.5),
]


def main():
    print(f"{'system':<12}{'P':>6}{'R':>6}{'F':>6}{'F*':>8}{'AER':>6}{'AER*':>8}  ok")
    worst = 0.0
    for name, p, r, f, aer in ROWS:
        got = 100 * f_measure(p / 100, r / 100)
        gap = max(abs(got - f), abs(100 - got - aer))
        worst = max(worst, gap)
        print(f"{name:<12}{p:6.1f}{r:6.1f}{f:6.1f}{got:8.2f}{aer:6.1f}{100 - got:8.2f}"
              f"  {'yes' if gap <= 0.1 + 1e-9 else 'NO'}")
    print(f"largest gap: {worst:.3f} points")


if __name__ == "__main__":
    main()
