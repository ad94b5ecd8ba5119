"""vruguard: hybrid cellular + DSRC vulnerable-road-user protection pipeline.

A deterministic implementation of the full chain: VRU beaconing with
smoothing and geofencing, a topic pub/sub bridge, relevance-filtered
PSM/DENM crafting at roadside units, unit-disk DSRC broadcast, and
vehicle-side time-to-collision alerting, plus the scenario engine used to
evaluate it.
"""

__version__ = "0.1.0"
