"""Access to the reference designs shipped with the package.

Available names:

- ``flagship``: the exactly certified all-elliptic design whose minors
  vanish in closed form; full-circle flexible.
- ``pseudo_planar``: zero hinge offsets with the balanced product of
  squared factors; flexes with every coupling angle split at -tau.
- ``perturbed``: the flagship with its first central angle widened by
  0.05; structurally valid but fails certification.
- ``deltoid_mixed``: a deltoid-antideltoid middle pair that closes and
  flexes once the antideltoid's glued side is read from its own chart.
- ``deltoid_published``: the same data with the antideltoid's outer
  side used as the glued one; assembles but does not close.
"""

from importlib import resources

_NAMES = (
    "flagship",
    "pseudo_planar",
    "perturbed",
    "deltoid_mixed",
    "deltoid_published",
)


def bundled_design(name: str) -> str:
    """Filesystem path of a bundled design file."""
    if name not in _NAMES:
        raise KeyError(f"no bundled design {name!r}; have {', '.join(_NAMES)}")
    path = resources.files("kokoflex").joinpath("designs", f"{name}.json")
    return str(path)
