"""gvss — tripwire-triggered surveillance daemon with an HTTP frame API.

A beam sensor is polled and debounced; an accepted obstruction locks the
workstation, notifies the configured owner, and opens the camera feed to
authenticated operators over HTTP. The `gvss` CLI hosts the daemon and a
scripted client for every endpoint.
"""

__version__ = "0.1.0"
