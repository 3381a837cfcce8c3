"""Attendance semantics, step by step.

A class is sliced into 10-minute blocks, one camera snapshot per block.
A student is present for the class when they show up in at least n
blocks; professors set n, and n = 0 makes attendance optional. Running
this script walks through every rule with concrete numbers.
"""

from datetime import datetime

from snapattend import (
    PresenceVector,
    ThresholdPolicy,
    allowed_misses,
    apply_admin_override,
    compute_block_schedule,
    course_standing,
    decide_class_attendance,
)


def show(title):
    print(f"\n--- {title} ---")


show("block schedule of a 09:00-09:50 class")
schedule = compute_block_schedule(datetime(2026, 3, 2, 9, 0), datetime(2026, 3, 2, 9, 50))
for i, t in enumerate(schedule.snapshot_times):
    print(f"  block {i}: snapshot at {t:%H:%M}")
print(f"  {schedule.block_count} blocks; a 90-minute class would have "
      f"{compute_block_schedule(datetime(2026, 3, 2, 9, 0), datetime(2026, 3, 2, 10, 30)).block_count}")

show("threshold decisions")
policy = ThresholdPolicy(course_default_n=3)
for bits in [(True, True, True, False, False), (True, True, False, False, False)]:
    vector = PresenceVector(student_id="s42", blocks=bits)
    record = decide_class_attendance(vector, policy, session_id="demo", block_count=5)
    print(f"  blocks {bits} with n=3 -> present={record.present} "
          f"({record.blocks_present}/{record.threshold_used})")

lenient = ThresholdPolicy(course_default_n=3, session_override_n=0)
record = decide_class_attendance(
    PresenceVector("s42", (False,) * 5), lenient, session_id="demo", block_count=5
)
print(f"  session override n=0 (attendance optional today) -> present={record.present}")

show("allowed misses: how many classes can still be skipped")
# 8 attended of 10 held, 20 scheduled, 75% required
print(f"  attended 8/10, 20 scheduled, 75% required -> "
      f"can miss {allowed_misses(8, 10, 20, 75)} more")
print(f"  perfect record, all sessions done -> {allowed_misses(10, 10, 10, 100)}")
print(f"  0% requirement, nothing held yet   -> {allowed_misses(0, 0, 10, 0)}")

show("admin override keeps the computed evidence")
computed = decide_class_attendance(
    PresenceVector("s42", (True, False, False, False, False)),
    policy, session_id="demo", block_count=5,
)
overridden = apply_admin_override(computed, True, "medical certificate")
print(f"  computed: present={computed.present}, blocks={computed.blocks_present}")
print(f"  override: present={overridden.present}, source={overridden.source.value}, "
      f"blocks still {overridden.blocks_present}, note={overridden.override_note!r}")

show("course standing")
records = [
    decide_class_attendance(
        PresenceVector("s42", (True,) * 3 if k < 8 else (False,) * 3),
        ThresholdPolicy(2), session_id=f"g{k}", block_count=3,
    )
    for k in range(10)
]
standing = course_standing("algorithms", "s42", records, total_scheduled=20, required_percent=75)
print(f"  held={standing.sessions_held} attended={standing.sessions_attended} "
      f"allowed_misses={standing.allowed_misses}")
