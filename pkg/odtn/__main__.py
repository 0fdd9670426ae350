"""Support running as: python -m odtn."""

from odtn.cli import main

raise SystemExit(main())
