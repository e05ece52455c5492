"""Checked-in runtime fixture.

``minirdd.py`` is the single-file local RDD emulation that gets copied into
every verification sandbox and next to generated output when requested.  It
is treated as a black box here; its own semantics suite lives with the
standalone ``minirdd`` package.
"""

from importlib import resources

SHIM_MODULE_NAME = "minirdd"
SHIM_FILENAME = "minirdd.py"


def shim_source() -> str:
    """Source text of the bundled runtime module."""
    return resources.files(__package__).joinpath(SHIM_FILENAME).read_text(encoding="utf-8")
