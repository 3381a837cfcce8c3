// Contract tests against a live seeded backend: the python services are
// spawned for real, a class is run to completion under the virtual
// clock, and the dashboard's client + viewmodel are checked field for
// field against raw API responses.

import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import net from "node:net";
import os from "node:os";
import path from "node:path";

import { ApiClient, ApiError } from "../src/api.js";
import { attendanceView, editFailed, standingView } from "../src/viewmodel.js";

const SECRET = "contract-secret";
const PYTHON = process.env.SNAPATTEND_PYTHON ?? "python3";

const SCENARIO = {
  seed: 11,
  noise_sigma: 0.0,
  students: [
    { id: "s001", embedding: "auto" },
    { id: "s002", embedding: "auto" },
    { id: "s003", embedding: "auto" },
  ],
  sessions: [
    {
      id: "g1",
      camera_id: "camA",
      start: "2026-03-02T09:00Z",
      end: "2026-03-02T09:50Z",
      present: { s001: [0, 1, 2, 3], s002: [2] },
    },
    {
      id: "g2",
      camera_id: "camB",
      start: "2026-03-02T11:00Z",
      end: "2026-03-02T11:50Z",
      present: { s001: [0, 1, 2], s002: [0, 1, 2, 3, 4] },
    },
  ],
};

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.listen(0, "127.0.0.1", () => {
      const addr = srv.address() as net.AddressInfo;
      srv.close(() => resolve(addr.port));
    });
    srv.on("error", reject);
  });
}

async function waitHttp(url: string, timeoutMs = 30000) {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(url);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error(`service at ${url} did not come up`);
}

let backendUrl = "";
let procs: ChildProcess[] = [];

async function advanceClock(to: string) {
  const resp = await fetch(`${backendUrl}/internal/clock/advance`, {
    method: "POST",
    headers: { "Content-Type": "application/json", "X-Internal-Secret": SECRET },
    body: JSON.stringify({ to }),
  });
  expect(resp.status).toBe(200);
}

beforeAll(async () => {
  const dir = mkdtempSync(path.join(os.tmpdir(), "snapattend-contract-"));
  const scenarioPath = path.join(dir, "scenario.json");
  const dbPath = path.join(dir, "contract.db");
  writeFileSync(scenarioPath, JSON.stringify(SCENARIO));

  const seeded = spawnSync(
    PYTHON,
    ["-m", "snapattend.cli", "seed", scenarioPath, "--db", dbPath],
    { encoding: "utf-8" },
  );
  if (seeded.status !== 0) {
    throw new Error(`seeding failed: ${seeded.stderr}`);
  }

  const backendPort = await freePort();
  const enginePort = await freePort();
  backendUrl = `http://127.0.0.1:${backendPort}`;

  procs.push(
    spawn(PYTHON, ["-m", "snapattend.engine_app"], {
      env: {
        ...process.env,
        SNAPATTEND_SCENARIO: scenarioPath,
        SNAPATTEND_CALLBACK_URL: `${backendUrl}/internal`,
        SNAPATTEND_SECRET: SECRET,
        SNAPATTEND_PORT: String(enginePort),
      },
      stdio: "ignore",
    }),
    spawn(PYTHON, ["-m", "snapattend.backend_app"], {
      env: {
        ...process.env,
        SNAPATTEND_DB: dbPath,
        SNAPATTEND_SCENARIO: scenarioPath,
        SNAPATTEND_ENGINE_URL: `http://127.0.0.1:${enginePort}`,
        SNAPATTEND_SECRET: SECRET,
        SNAPATTEND_CLOCK: "virtual",
        SNAPATTEND_PORT: String(backendPort),
      },
      stdio: "ignore",
    }),
  );
  await waitHttp(`http://127.0.0.1:${enginePort}/healthz`);
  await waitHttp(`${backendUrl}/healthz`);

  // run the first class to completion; g2 stays scheduled
  await advanceClock("2026-03-02T08:55Z");
  await advanceClock("2026-03-02T09:00Z");
  const admin = new ApiClient(backendUrl);
  await admin.login("admin", "admin-pw");
  const deadline = Date.now() + 30000;
  for (;;) {
    const detail = await admin.sessionDetail("g1");
    if (detail.state === "complete") break;
    if (detail.state === "failed" || Date.now() > deadline) {
      throw new Error(`g1 ended in state ${detail.state}`);
    }
    await new Promise((r) => setTimeout(r, 100));
  }
}, 120000);

afterAll(() => {
  for (const p of procs) p.kill();
});

describe("student view", () => {
  it("shows blocks, threshold, and allowed misses field-for-field", async () => {
    const client = new ApiClient(backendUrl);
    const login = await client.login("s001", "s001-pw");
    expect(login.role).toBe("student");

    // raw responses straight off the wire
    const rawStanding = await (
      await fetch(`${backendUrl}/students/s001/standing?course=course-1`, {
        headers: { Authorization: `Bearer ${client.token}` },
      })
    ).json();
    const rawAttendance = await (
      await fetch(`${backendUrl}/sessions/g1/attendance/s001`, {
        headers: { Authorization: `Bearer ${client.token}` },
      })
    ).json();

    const sv = standingView(await client.standing("s001", "course-1"));
    expect(sv.missesBadge).toBe(`can miss ${rawStanding.allowed_misses} more`);
    expect(sv.attendedLine).toBe(
      `attended ${rawStanding.sessions_attended} of ${rawStanding.sessions_held} held ` +
        `(${rawStanding.total_scheduled} scheduled)`,
    );
    expect(sv.requirementLine).toBe(`requirement: ${rawStanding.required_percent}%`);

    const av = attendanceView(await client.sessionAttendance("g1", "s001"));
    expect(av.headline).toBe(
      `${rawAttendance.blocks_present} of ${rawAttendance.block_count} blocks ` +
        `(threshold ${rawAttendance.threshold_used}): present`,
    );
    expect(av.blockTicks.split(" ")).toHaveLength(rawAttendance.block_count);

    // the seeded script: s001 sat 4 of 5 blocks, threshold 3
    expect(rawAttendance.blocks_present).toBe(4);
    expect(rawAttendance.block_count).toBe(5);
    expect(av.headline).toBe("4 of 5 blocks (threshold 3): present");
  });

  it("keeps students away from other records", async () => {
    const client = new ApiClient(backendUrl);
    await client.login("s002", "s002-pw");
    await expect(client.sessionAttendance("g1", "s001")).rejects.toMatchObject({
      status: 403,
    });
  });
});

describe("professor edits", () => {
  it("threshold edit on a scheduled session round-trips", async () => {
    const client = new ApiClient(backendUrl);
    await client.login("prof-1", "prof-1-pw");
    await client.setSessionThreshold("g2", 1);
    const detail = await client.sessionDetail("g2");
    expect(detail.threshold_override).toBe(1);
    expect(detail.effective_threshold).toBe(1);
  });

  it("conflict on a finalized session surfaces inline and rolls back", async () => {
    const client = new ApiClient(backendUrl);
    await client.login("prof-1", "prof-1-pw");
    const before = await client.sessionDetail("g1");
    expect(before.state).toBe("complete");

    let state = { value: before.effective_threshold, pending: false, inlineError: null as string | null };
    try {
      await client.setSessionThreshold("g1", before.effective_threshold + 1);
      throw new Error("edit on finalized session must fail");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      const apiErr = err as ApiError;
      expect(apiErr.status).toBe(409);
      state = editFailed(state, before.effective_threshold, apiErr);
    }
    expect(state.inlineError).toMatch(/^conflict:/);
    expect(state.value).toBe(before.effective_threshold);

    const after = await client.sessionDetail("g1");
    expect(after.effective_threshold).toBe(before.effective_threshold);
  });
});
