// Thin typed client over the backend REST API. Every dashboard number
// comes out of one of these calls.

import type {
  ClassTotal,
  CourseSessionRow,
  LoginResponse,
  SessionAttendance,
  SessionDetail,
  Standing,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  token: string | null = null;

  constructor(public baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    const resp = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    const doc = text ? JSON.parse(text) : {};
    if (!resp.ok) {
      throw new ApiError(resp.status, doc.code ?? "error", doc.message ?? resp.statusText);
    }
    return doc as T;
  }

  async login(userId: string, password: string): Promise<LoginResponse> {
    const doc = await this.request<LoginResponse>("POST", "/auth/login", {
      user_id: userId,
      password,
    });
    this.token = doc.token;
    return doc;
  }

  standing(studentId: string, courseId: string): Promise<Standing> {
    return this.request("GET", `/students/${studentId}/standing?course=${courseId}`);
  }

  sessionAttendance(sessionId: string, studentId: string): Promise<SessionAttendance> {
    return this.request("GET", `/sessions/${sessionId}/attendance/${studentId}`);
  }

  sessionDetail(sessionId: string): Promise<SessionDetail> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  courseSessions(courseId: string): Promise<CourseSessionRow[]> {
    return this.request("GET", `/courses/${courseId}/sessions`);
  }

  classTotal(courseId: string, sessionId: string): Promise<ClassTotal> {
    return this.request("GET", `/courses/${courseId}/sessions/${sessionId}/total`);
  }

  setSessionThreshold(sessionId: string, n: number): Promise<unknown> {
    return this.request("PUT", `/sessions/${sessionId}/threshold`, { n });
  }

  setCourseThreshold(courseId: string, n: number): Promise<unknown> {
    return this.request("PUT", `/courses/${courseId}/threshold`, { n });
  }

  setSessionRoom(sessionId: string, roomNumber: string): Promise<unknown> {
    return this.request("PUT", `/sessions/${sessionId}/room`, { room_number: roomNumber });
  }

  setCourseRoom(courseId: string, roomNumber: string): Promise<unknown> {
    return this.request("PUT", `/courses/${courseId}/room`, { room_number: roomNumber });
  }

  overrideAttendance(
    sessionId: string,
    studentId: string,
    present: boolean,
    note: string,
  ): Promise<SessionAttendance> {
    return this.request(
      "PUT",
      `/sessions/${sessionId}/attendance/${studentId}/override`,
      { present, note },
    );
  }
}
