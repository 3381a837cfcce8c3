// Response shapes of the backend REST API. The dashboard renders these
// fields verbatim; it never computes attendance on its own.

export type Role = "student" | "professor" | "admin";

export interface LoginResponse {
  user_id: string;
  role: Role;
  token: string;
}

export type SessionState =
  | "scheduled"
  | "connecting"
  | "running"
  | "complete"
  | "failed";

export interface StandingSessionEntry {
  session_id: string;
  present: boolean;
  blocks_present: number;
  threshold_used: number;
  source: "computed" | "admin_override";
}

export interface Standing {
  course_id: string;
  student_id: string;
  sessions_held: number;
  sessions_attended: number;
  total_scheduled: number;
  required_percent: number;
  allowed_misses: number;
  sessions: StandingSessionEntry[];
}

export interface SessionAttendance {
  session_id: string;
  student_id: string;
  state: SessionState;
  block_count: number;
  blocks: boolean[];
  finalized: boolean;
  blocks_present: number;
  threshold_used: number;
  present: boolean | null;
  source: "computed" | "admin_override" | null;
  override_note: string | null;
}

export interface SessionDetail {
  session_id: string;
  course_id: string;
  start: string;
  end: string;
  room_number: string;
  camera_id: string;
  state: SessionState;
  block_count: number;
  threshold_override: number | null;
  effective_threshold: number;
  degraded_blocks: number[];
  fail_reason: string | null;
}

export interface ClassTotal {
  course_id: string;
  session_id: string;
  state: SessionState;
  enrolled: number;
  present_count: number | null;
}

export interface CourseSessionRow {
  session_id: string;
  start_time: string;
  end_time: string;
  room_number: string;
  state: SessionState;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
