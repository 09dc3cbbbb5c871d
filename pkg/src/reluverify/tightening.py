"""Property tightening: raise the output threshold by the certified gap
between an abstract network and the network it abstracts.

If original(x) + d <= abstract(x) on the box, then checking the abstract
network against ``y > c + d`` over-approximates checking the original
against ``y > c``: an UNSAT answer for the tightened query carries over.
"""

from __future__ import annotations

from .bounds import BoundMethod, output_gap
from .network import InputBox, Network, OutputProperty


def tighten_property(
    abstract: Network,
    original: Network,
    box: InputBox,
    prop: OutputProperty,
    method: BoundMethod = BoundMethod.SBT,
) -> OutputProperty:
    """Return the tightened property ``y > c + d`` with d = output_gap(...)."""
    d = output_gap(abstract, original, box, method)
    return OutputProperty(prop.threshold + d)
