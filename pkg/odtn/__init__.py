"""odtn - Decision trees and adaptive ranking with persistent noisy outcomes."""

__version__ = "0.1.0"
