"""Run the planar ring potential end to end and print the per-orbit story.

Writes the JSON report and trajectory CSVs next to this script under out/.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from lyapcenter.pipeline import RunConfig, run

HERE = pathlib.Path(__file__).resolve().parent
OUT = HERE / "out"


def main():
    config = RunConfig.from_toml(HERE.parent / "configs" / "ex1.toml")
    report = run(config, json_out=OUT / "ex1_report.json", csv_dir=OUT / "ex1_orbits")
    for entry in report.orbit_reports:
        print(f"orbit {entry['index']}: point {entry['point']}")
        print(f"  betas {entry['betas']}  kernel {entry['kernel_dim']}")
        print(f"  verdict: {entry['verdict']}")
        if entry["conley"]:
            c = entry["conley"]
            print(f"  chi_minus {c['chi_minus']!r} -> chi_plus {c['chi_plus']!r}"
                  f"  certified={c['certified']}")
        for sol in entry["solutions"]:
            print(f"  a={sol['amplitude']:g}: T={sol['period']:.9f} "
                  f"residual={sol['residual']:.2e} drift={sol['energy_drift']:.2e}")
    print(f"report: {OUT / 'ex1_report.json'}")


if __name__ == "__main__":
    main()
