// Single-page dashboard: #/login, #/student, #/professor, #/admin.
// Role views render backend responses through the viewmodel; during a
// running class the open view re-polls every few seconds. Stale poll
// responses are dropped by sequence number.

import { ApiClient, ApiError } from "./api.js";
import type { LoginResponse, SessionDetail } from "./types.js";
import {
  attendanceView,
  beginEdit,
  editFailed,
  editSucceeded,
  professorSessionView,
  standingView,
  type EditState,
} from "./viewmodel.js";

const COURSE_ID = "course-1"; // seeded deployments ship one course
const POLL_MS = 5000;

const api = new ApiClient(
  (window as { SNAPATTEND_API?: string }).SNAPATTEND_API ?? "http://127.0.0.1:8000",
);

let me: LoginResponse | null = null;
let pollTimer: number | null = null;
let pollSeq = 0;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

function root(): HTMLElement {
  return document.getElementById("app") as HTMLElement;
}

function setView(...nodes: (Node | string)[]) {
  const app = root();
  app.replaceChildren(...nodes);
}

function stopPolling() {
  if (pollTimer !== null) {
    clearInterval(pollTimer);
    pollTimer = null;
  }
  pollSeq += 1;
}

function navigate(hash: string) {
  window.location.hash = hash;
}

// ---------- login ----------

function renderLogin(message = "") {
  stopPolling();
  const user = el("input", { placeholder: "user id", id: "login-user" });
  const pass = el("input", { placeholder: "password", type: "password", id: "login-pass" });
  const error = el("p", { class: "error", id: "login-error" }, message);
  const button = el("button", {}, "sign in");
  button.onclick = async () => {
    try {
      me = await api.login(user.value.trim(), pass.value);
      navigate(`#/${me.role}`);
    } catch (err) {
      error.textContent = err instanceof ApiError ? err.message : String(err);
    }
  };
  setView(
    el("h1", {}, "snapattend"),
    el("div", { class: "card login" }, user, pass, button, error),
  );
}

function requireRole(role: string): boolean {
  if (!me || me.role !== role) {
    navigate("#/login");
    return false;
  }
  return true;
}

// a 401 mid-session means the token expired: back to the login screen
function handleRefreshError(err: unknown) {
  if (err instanceof ApiError && err.status === 401) {
    me = null;
    api.token = null;
    navigate("#/login");
    return;
  }
  console.error(err);
}

// ---------- student ----------

async function renderStudent() {
  if (!me || !requireRole("student")) return;
  const studentId = me.user_id;
  const seq = ++pollSeq;

  async function refresh() {
    if (!me) return;
    const standing = await api.standing(studentId, COURSE_ID);
    if (seq !== pollSeq) return; // a newer view took over
    const view = standingView(standing);
    const rows = await Promise.all(
      standing.sessions.map((s) => api.sessionAttendance(s.session_id, studentId)),
    );
    if (seq !== pollSeq) return;

    const list = el("table", { class: "sessions" });
    list.append(
      el("tr", {}, el("th", {}, "session"), el("th", {}, "blocks"), el("th", {}, "result")),
    );
    for (const att of rows) {
      const v = attendanceView(att);
      list.append(
        el(
          "tr",
          {},
          el("td", {}, v.sessionId),
          el("td", { class: "mono" }, v.blockTicks),
          el("td", {}, v.headline + (v.overrideNote ? ` [override: ${v.overrideNote}]` : "")),
        ),
      );
    }
    setView(
      header(`student ${studentId}`),
      el(
        "div",
        { class: "card" },
        el("h2", {}, view.courseId),
        el("p", {}, view.attendedLine),
        el("p", {}, view.requirementLine),
        el("p", { class: "badge", id: "misses-badge" }, view.missesBadge),
      ),
      el("div", { class: "card" }, list),
    );
  }

  await refresh().catch(handleRefreshError);
  pollTimer = window.setInterval(() => void refresh().catch(handleRefreshError), POLL_MS);
}

// ---------- professor ----------

async function renderProfessor() {
  if (!me || !requireRole("professor")) return;
  const seq = ++pollSeq;
  const edits = new Map<string, EditState<number>>();

  async function refresh() {
    const sessions = await api.courseSessions(COURSE_ID);
    if (seq !== pollSeq) return;
    const blocks: Node[] = [header(`professor ${me!.user_id}`)];
    for (const row of sessions) {
      const detail = await api.sessionDetail(row.session_id);
      const total =
        detail.state === "complete"
          ? await api.classTotal(COURSE_ID, row.session_id)
          : null;
      if (seq !== pollSeq) return;
      blocks.push(professorCard(detail, total, edits, refresh));
    }
    setView(...blocks);
  }

  function professorCard(
    detail: SessionDetail,
    total: Parameters<typeof professorSessionView>[1],
    editMap: Map<string, EditState<number>>,
    reload: () => Promise<void>,
  ): HTMLElement {
    const view = professorSessionView(detail, total);
    const edit =
      editMap.get(detail.session_id) ??
      ({ value: view.thresholdValue, pending: false, inlineError: null } as EditState<number>);
    editMap.set(detail.session_id, edit);

    const input = el("input", {
      type: "number",
      min: "0",
      value: String(edit.value),
    }) as HTMLInputElement;
    input.disabled = !view.thresholdEditable || edit.pending;
    const save = el("button", {}, "set threshold");
    save.disabled = input.disabled;
    const inline = el("span", { class: "error inline" }, edit.inlineError ?? "");

    save.onclick = async () => {
      const attempted = Number(input.value);
      editMap.set(detail.session_id, beginEdit(edit, attempted));
      try {
        await api.setSessionThreshold(detail.session_id, attempted);
        editMap.set(detail.session_id, editSucceeded({ ...edit, value: attempted }));
      } catch (err) {
        if (err instanceof ApiError) {
          editMap.set(
            detail.session_id,
            editFailed(edit, view.thresholdValue, err),
          );
        } else {
          throw err;
        }
      }
      await reload();
    };

    return el(
      "div",
      { class: "card session-card", id: `session-${detail.session_id}` },
      el("h3", {}, `${detail.session_id} (${detail.room_number})`),
      el("p", {}, `state: ${view.stateText}`),
      el("p", {}, `total: ${view.totalLine}`),
      el("label", {}, "threshold ", input),
      save,
      inline,
    );
  }

  await refresh().catch(handleRefreshError);
  pollTimer = window.setInterval(() => void refresh().catch(handleRefreshError), POLL_MS);
}

// ---------- admin ----------

async function renderAdmin() {
  if (!me || !requireRole("admin")) return;
  ++pollSeq;
  const sessionInput = el("input", { placeholder: "session id" }) as HTMLInputElement;
  const studentInput = el("input", { placeholder: "student id" }) as HTMLInputElement;
  const noteInput = el("input", { placeholder: "override note (required)" }) as HTMLInputElement;
  const presentBox = el("input", { type: "checkbox" }) as HTMLInputElement;
  const outcome = el("p", { id: "override-outcome" });
  const apply = el("button", {}, "apply override");
  apply.onclick = async () => {
    try {
      const doc = await api.overrideAttendance(
        sessionInput.value.trim(),
        studentInput.value.trim(),
        presentBox.checked,
        noteInput.value,
      );
      const v = attendanceView(doc);
      outcome.className = "ok";
      outcome.textContent = `now: ${v.headline}`;
    } catch (err) {
      outcome.className = "error";
      outcome.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  };

  const roomSession = el("input", { placeholder: "session id" }) as HTMLInputElement;
  const roomInput = el("input", { placeholder: "new room" }) as HTMLInputElement;
  const roomOutcome = el("p", { id: "room-outcome" });
  const move = el("button", {}, "move course room");
  move.onclick = async () => {
    try {
      await api.setCourseRoom(COURSE_ID, roomInput.value.trim());
      roomOutcome.className = "ok";
      roomOutcome.textContent = "course moved";
    } catch (err) {
      roomOutcome.className = "error";
      roomOutcome.textContent =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  };

  setView(
    header(`admin ${me.user_id}`),
    el(
      "div",
      { class: "card" },
      el("h3", {}, "attendance override"),
      sessionInput, studentInput, el("label", {}, "present ", presentBox),
      noteInput, apply, outcome,
    ),
    el(
      "div",
      { class: "card" },
      el("h3", {}, "move whole course"),
      roomSession, roomInput, move, roomOutcome,
    ),
  );
}

// ---------- shell ----------

function header(title: string): HTMLElement {
  const out = el("button", { class: "linkish" }, "sign out");
  out.onclick = () => {
    me = null;
    api.token = null;
    navigate("#/login");
  };
  return el("div", { class: "topbar" }, el("h1", {}, title), out);
}

function route() {
  stopPolling();
  const hash = window.location.hash || "#/login";
  if (hash.startsWith("#/student")) void renderStudent();
  else if (hash.startsWith("#/professor")) void renderProfessor();
  else if (hash.startsWith("#/admin")) void renderAdmin();
  else renderLogin();
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
