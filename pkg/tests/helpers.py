"""Shared test utilities."""

import re

from icleda.netlist import from_dict, to_dict

F_TEXT = "(!x1 & x2) | (x1 & x2 & !x3)"
NOT_F_TEXT = "(x1 & x3) | !x2"


def alias(n, old, new):
    """Copy of ``n`` with domain ``old`` renamed to ``new`` in its species only."""
    d = to_dict(n)
    for s in d["species"]:
        s["text"] = re.sub(rf"\b{old}\b", new, s["text"])
    return from_dict(d)
