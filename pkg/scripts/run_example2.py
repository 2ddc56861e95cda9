"""Run the two-block R^4 potential: classical center at the origin plus a
symmetric center on the relative equilibrium through (1, 0, 0, 0)."""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from lyapcenter.pipeline import RunConfig, run

HERE = pathlib.Path(__file__).resolve().parent
OUT = HERE / "out"


def main():
    config = RunConfig.from_toml(HERE.parent / "configs" / "ex2.toml")
    report = run(config, json_out=OUT / "ex2_report.json", csv_dir=OUT / "ex2_orbits")
    for entry in report.orbit_reports:
        print(f"orbit {entry['index']}: point {entry['point']}")
        print(f"  hessian spectrum {entry['eigenvalues']}")
        print(f"  verdict: {entry['verdict']}")
        for sol in entry["solutions"]:
            print(f"  a={sol['amplitude']:g}: T={sol['period']:.9f} "
                  f"minimal={sol['minimal_period']:.9f} residual={sol['residual']:.2e}")
    print(f"report: {OUT / 'ex2_report.json'}")


if __name__ == "__main__":
    main()
