# Routes module
from . import health, mcp, selectors, frames, exponentials, experiments

__all__ = ['health', 'mcp', 'selectors', 'frames', 'exponentials', 'experiments']
