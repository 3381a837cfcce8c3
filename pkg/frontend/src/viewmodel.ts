// Pure mapping from API responses to display structures. Everything here
// formats backend fields; nothing recomputes attendance, so every number
// on screen traces back to exactly one response field.

import type {
  ClassTotal,
  SessionAttendance,
  SessionDetail,
  Standing,
  StandingSessionEntry,
} from "./types.js";

export interface StandingView {
  courseId: string;
  attendedLine: string; // "attended 8 of 10 held (20 scheduled)"
  requirementLine: string; // "requirement: 75%"
  missesBadge: string; // "can miss 3 more"
  sessions: SessionRowView[];
}

export interface SessionRowView {
  sessionId: string;
  resultText: string; // "present" | "absent"
  blocksLine: string; // "3 of 5 blocks (threshold 3)" when detail known
  overridden: boolean;
}

export function missesBadge(allowedMisses: number): string {
  if (allowedMisses === 1) return "can miss 1 more";
  return `can miss ${allowedMisses} more`;
}

export function standingView(doc: Standing): StandingView {
  return {
    courseId: doc.course_id,
    attendedLine:
      `attended ${doc.sessions_attended} of ${doc.sessions_held} held ` +
      `(${doc.total_scheduled} scheduled)`,
    requirementLine: `requirement: ${doc.required_percent}%`,
    missesBadge: missesBadge(doc.allowed_misses),
    sessions: doc.sessions.map(standingSessionRow),
  };
}

function standingSessionRow(entry: StandingSessionEntry): SessionRowView {
  return {
    sessionId: entry.session_id,
    resultText: entry.present ? "present" : "absent",
    blocksLine: `${entry.blocks_present} blocks (threshold ${entry.threshold_used})`,
    overridden: entry.source === "admin_override",
  };
}

export interface AttendanceView {
  sessionId: string;
  headline: string; // "3 of 5 blocks (threshold 3): present"
  blockTicks: string; // "x x x . ." one mark per block
  finalized: boolean;
  overrideNote: string | null;
}

export function attendanceView(doc: SessionAttendance): AttendanceView {
  const result = doc.finalized
    ? doc.present
      ? "present"
      : "absent"
    : `in progress (${doc.state})`;
  return {
    sessionId: doc.session_id,
    headline:
      `${doc.blocks_present} of ${doc.block_count} blocks ` +
      `(threshold ${doc.threshold_used}): ${result}`,
    blockTicks: doc.blocks.map((b) => (b ? "x" : ".")).join(" "),
    finalized: doc.finalized,
    overrideNote: doc.override_note,
  };
}

export interface ProfessorSessionView {
  sessionId: string;
  stateText: string;
  totalLine: string; // "31 of 50 present" once complete
  thresholdValue: number;
  thresholdEditable: boolean; // backend rejects edits on finalized sessions
  roomEditable: boolean; // room frozen once the camera connects
}

export function professorSessionView(
  detail: SessionDetail,
  total: ClassTotal | null,
): ProfessorSessionView {
  return {
    sessionId: detail.session_id,
    stateText: detail.fail_reason
      ? `${detail.state}: ${detail.fail_reason}`
      : detail.state,
    totalLine:
      total && total.present_count !== null
        ? `${total.present_count} of ${total.enrolled} present`
        : "not finalized yet",
    thresholdValue: detail.effective_threshold,
    thresholdEditable: detail.state !== "complete",
    roomEditable: detail.state === "scheduled",
  };
}

// Optimistic edits: the control shows the attempted value immediately;
// a rejection rolls it back and surfaces the server's message inline.

export interface EditState<T> {
  value: T;
  pending: boolean;
  inlineError: string | null;
}

export function beginEdit<T>(state: EditState<T>, attempted: T): EditState<T> {
  return { value: attempted, pending: true, inlineError: null };
}

export function editSucceeded<T>(state: EditState<T>): EditState<T> {
  return { ...state, pending: false, inlineError: null };
}

export function editFailed<T>(
  state: EditState<T>,
  serverValue: T,
  error: { status: number; message: string },
): EditState<T> {
  const label =
    error.status === 409
      ? `conflict: ${error.message}`
      : error.status === 403
        ? `not allowed: ${error.message}`
        : error.message;
  return { value: serverValue, pending: false, inlineError: label };
}
