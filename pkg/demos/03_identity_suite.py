"""Running the identity suite over the catalog."""
from spheremin.catalog import build_calabi, catalog_list
from spheremin.identities import run_suite

for spec in catalog_list() + [build_calabi(4)]:
    rep = run_suite(spec, 6, 6, tier=2)
    print(f"\n{spec.name}  branch={rep.branch}  passed={rep.passed}")
    for c in rep.checks:
        if c.status == "skipped":
            print(f"  {c.name:<30} skipped ({c.skip_reason})")
        else:
            print(f"  {c.name:<30} {c.status:<6} max residual {c.max_residual:.1e} (tol {c.tolerance:.0e})")
