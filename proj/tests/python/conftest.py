"""Make the build-tree extension and the package wrapper importable.

EXPCA_BUILD_DIR points at the directory holding the compiled ``_expca``
module; EXPCA_PACKAGE_DIR at the ``expca`` package source. Both are set by
the ctest harness; developers can export them manually to run pytest
directly.
"""

import os
import sys

for env_var in ("EXPCA_PACKAGE_DIR", "EXPCA_BUILD_DIR"):
    path = os.environ.get(env_var)
    if path and path not in sys.path:
        sys.path.insert(0, path)
