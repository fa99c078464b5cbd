/** Cross-language check: a genuine full+delta stream captured from the
 * engine's wire codec must fold through this client's mirror to exactly the
 * server's final snapshot. */

import { strict as assert } from "node:assert";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import { applyStateMessage } from "../src/mirror.js";
import type { Snapshot, StateMessage } from "../src/protocol.js";

// compiled tests run from dist/test; the fixture stays in the source tree
const here = dirname(fileURLToPath(import.meta.url));
const fixture = JSON.parse(
  readFileSync(join(here, "..", "..", "test", "fixtures", "state_stream.json"), "utf-8"),
) as { messages: StateMessage[]; final: Snapshot };

test("captured server stream reconstructs the final snapshot exactly", () => {
  assert.equal(fixture.messages[0].mode, "full");
  assert.ok(fixture.messages.slice(1).every((m) => m.mode === "delta"));
  let mirror: Snapshot | null = null;
  for (const msg of fixture.messages) {
    mirror = applyStateMessage(mirror, msg);
  }
  assert.ok(mirror);
  assert.deepEqual(mirror, fixture.final);
});

test("stream exercises clones, held objects, recorder and recordings", () => {
  const final = fixture.final;
  assert.ok(Object.keys(final.clones).length >= 1);
  assert.ok(Object.values(final.objects).some((o) => o.held_by !== null));
  assert.ok(final.recordings.length >= 1);
});
