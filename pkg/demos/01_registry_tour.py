#!/usr/bin/env python3
"""Tour of the shipped dataset registry and its taxonomy groups.

The registry is plain YAML (src/auddt/data/registry.yaml): 28 datasets, each
carrying the attribute flags the aggregation layer groups by. Nothing here
touches audio; it is all metadata.
"""

from auddt import default_registry, select_group
from auddt.registry import GROUP_NAMES

registry = default_registry()
print(f"shipped registry: {len(registry)} datasets\n")

print("every taxonomy group and its members:")
for group in GROUP_NAMES:
    members = select_group(group, registry)
    ids = ", ".join(d.id for d in members)
    print(f"  {group:<15} ({len(members):>2}) {ids if group != 'all' else '...'}")

print("\none descriptor in full:")
d = select_group("asvspoof5", registry)[0]
print(f"  id={d.id}  display={d.display_name}  category={d.category.value}")
print(f"  perturbation={d.perturbation}  vocoder={d.uses_vocoder}  "
      f"method={d.generative_method.value}  adapter={d.adapter_id}")

print("\ndatasets excluded from accuracy-style group aggregates:")
for d in registry:
    if d.group_exclusions:
        print(f"  {d.id:<15} excluded from: {', '.join(sorted(d.group_exclusions))}")

print("\nwhy it matters: the in_the_wild group keeps only datasets whose")
print("'real' clips were never neurally re-processed:")
itw = select_group("in_the_wild", registry)
kept = [d.id for d in itw if "in_the_wild" not in d.group_exclusions]
dropped = [d.id for d in itw if "in_the_wild" in d.group_exclusions]
print(f"  selected: {[d.id for d in itw]}")
print(f"  aggregated: {kept}   (excluded: {dropped})")
