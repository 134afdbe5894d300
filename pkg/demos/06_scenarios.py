# # Named scenarios and their verdict tables
#
# Each scenario is a JSON file with a Young function, a sequence generator,
# a ladder of dyadic depths and a table of checks with expected outcomes.
# The same tables run from the command line with
# `orlicz-lab scenario run all`.

from orlicz_lab import gallery

for name in gallery.list_scenarios():
    res = gallery.run_scenario(name)
    print(f"{name:<24} ok={res.ok}")
    for r in res.results:
        depth = "" if r.depth is None else f"@{r.depth}"
        print(f"    {r.check + depth:<44} expect={r.expect:<4} outcome={r.outcome:<4} value={r.value:.4g}")
