// Viewmodel mapping: every rendered string is a formatting of backend
// fields, so these tests pin the exact field-to-text wiring.

import { describe, expect, it } from "vitest";

import {
  attendanceView,
  beginEdit,
  editFailed,
  editSucceeded,
  missesBadge,
  professorSessionView,
  standingView,
} from "../src/viewmodel.js";
import type { SessionAttendance, SessionDetail, Standing } from "../src/types.js";

const STANDING: Standing = {
  course_id: "course-1",
  student_id: "s001",
  sessions_held: 10,
  sessions_attended: 8,
  total_scheduled: 20,
  required_percent: 75,
  allowed_misses: 3,
  sessions: [
    {
      session_id: "g1",
      present: true,
      blocks_present: 3,
      threshold_used: 3,
      source: "computed",
    },
  ],
};

describe("standingView", () => {
  it("copies backend numbers into display lines", () => {
    const v = standingView(STANDING);
    expect(v.attendedLine).toBe("attended 8 of 10 held (20 scheduled)");
    expect(v.requirementLine).toBe("requirement: 75%");
    expect(v.missesBadge).toBe("can miss 3 more");
    expect(v.sessions[0]?.resultText).toBe("present");
    expect(v.sessions[0]?.blocksLine).toBe("3 blocks (threshold 3)");
  });

  it("badges singular misses", () => {
    expect(missesBadge(1)).toBe("can miss 1 more");
    expect(missesBadge(0)).toBe("can miss 0 more");
  });

  it("marks overridden sessions", () => {
    const doc = {
      ...STANDING,
      sessions: [{ ...STANDING.sessions[0]!, source: "admin_override" as const }],
    };
    expect(standingView(doc).sessions[0]?.overridden).toBe(true);
  });
});

describe("attendanceView", () => {
  const ATT: SessionAttendance = {
    session_id: "g1",
    student_id: "s001",
    state: "complete",
    block_count: 5,
    blocks: [true, true, true, false, false],
    finalized: true,
    blocks_present: 3,
    threshold_used: 3,
    present: true,
    source: "computed",
    override_note: null,
  };

  it("renders the block justification line", () => {
    const v = attendanceView(ATT);
    expect(v.headline).toBe("3 of 5 blocks (threshold 3): present");
    expect(v.blockTicks).toBe("x x x . .");
  });

  it("shows progress while the class runs", () => {
    const v = attendanceView({
      ...ATT,
      finalized: false,
      state: "running",
      present: null,
      blocks_present: 1,
      blocks: [true, false, false, false, false],
    });
    expect(v.headline).toBe("1 of 5 blocks (threshold 3): in progress (running)");
  });
});

describe("professorSessionView", () => {
  const DETAIL: SessionDetail = {
    session_id: "g1",
    course_id: "course-1",
    start: "2026-03-02T09:00Z",
    end: "2026-03-02T09:50Z",
    room_number: "room-camA",
    camera_id: "camA",
    state: "complete",
    block_count: 5,
    threshold_override: null,
    effective_threshold: 3,
    degraded_blocks: [],
    fail_reason: null,
  };

  it("disables edits the backend would reject", () => {
    const v = professorSessionView(DETAIL, {
      course_id: "course-1",
      session_id: "g1",
      state: "complete",
      enrolled: 50,
      present_count: 31,
    });
    expect(v.totalLine).toBe("31 of 50 present");
    expect(v.thresholdEditable).toBe(false); // finalized
    expect(v.roomEditable).toBe(false); // camera already ran
  });

  it("enables both edits while scheduled", () => {
    const v = professorSessionView({ ...DETAIL, state: "scheduled" }, null);
    expect(v.totalLine).toBe("not finalized yet");
    expect(v.thresholdEditable).toBe(true);
    expect(v.roomEditable).toBe(true);
  });
});

describe("edit lifecycle", () => {
  it("optimistic value, rollback with inline conflict", () => {
    let state = { value: 3, pending: false, inlineError: null as string | null };
    state = beginEdit(state, 1);
    expect(state).toEqual({ value: 1, pending: true, inlineError: null });
    state = editFailed(state, 3, { status: 409, message: "session g1 is already finalized" });
    expect(state.value).toBe(3); // rolled back to the server's value
    expect(state.inlineError).toBe("conflict: session g1 is already finalized");
  });

  it("forbidden edits name the role problem", () => {
    const state = editFailed(
      { value: 2, pending: true, inlineError: null },
      2,
      { status: 403, message: "role 'student' may not do this" },
    );
    expect(state.inlineError).toContain("not allowed");
  });

  it("success clears pending and keeps the new value", () => {
    const state = editSucceeded({ value: 1, pending: true, inlineError: null });
    expect(state).toEqual({ value: 1, pending: false, inlineError: null });
  });
});
