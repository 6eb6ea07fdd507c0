from .census import ComponentCensus, census, count_f, count_u
from .difference import add_one_cost, remove_one_cost
from .selector import Selector, canonical_form, selector_from_spec

__all__ = [
    "Selector",
    "selector_from_spec",
    "canonical_form",
    "ComponentCensus",
    "census",
    "count_f",
    "count_u",
    "add_one_cost",
    "remove_one_cost",
]
