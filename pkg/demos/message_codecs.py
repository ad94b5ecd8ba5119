"""Encode and decode the two safety message formats on the wire.

Shows a pedestrian position report converted into a 24-byte personal
safety message, the same content wrapped as a 39-byte event notification
with a destination area, and what the decoder does with a damaged frame.
"""

from vruguard.messages import (
    CAUSE_HUMAN_PRESENCE,
    DecodeError,
    DenmMessage,
    PotiReport,
    decode_psm,
    encode_denm,
    encode_psm,
    poti_to_psm,
)

report = PotiReport(
    id="7",
    ts_ms=61_000,
    lat_deg=57.7089,
    lon_deg=12.5740,
    speed_mps=1.4,
    heading_deg=90.0,
    accuracy_m=3.0,
    activity="walking",
)
print("position report (bus JSON):")
print(" ", report.to_json().decode())

psm = poti_to_psm(report, msg_cnt=0, station_id=7, now_ms=report.ts_ms)
frame = encode_psm(psm)
print()
print(f"as a {len(frame)}-byte safety message: {frame.hex()}")
print(f"  lat quantized to 1e-7 deg: {psm.lat_e7} (~1 cm resolution)")
print(f"  sec_mark wraps each minute: {psm.sec_mark_ms} ms")

decoded = decode_psm(frame)
assert decoded == psm
print("  decode(encode(m)) == m")

denm = DenmMessage(
    **psm.__dict__,
    cause_code=CAUSE_HUMAN_PRESENCE,
    sub_cause=0,
    sequence_number=1,
    dest_center_lat_e7=psm.lat_e7,
    dest_center_lon_e7=psm.lon_e7,
    dest_radius_m=400,
    hop_limit=3,
)
wire = encode_denm(denm)
print()
print(f"as a {len(wire)}-byte event notification: {wire.hex()}")
print(f"  cause code {denm.cause_code} = human presence on the road")
print(f"  forwardable {denm.hop_limit} more hops inside a {denm.dest_radius_m} m disk")

print()
print("a truncated frame is rejected, not misparsed:")
try:
    decode_psm(frame[:20])
except DecodeError as e:
    print(f"  {type(e).__name__}: {e}")
