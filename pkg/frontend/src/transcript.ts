/**
 * Transcript recording and export.
 *
 * Entries hold the exact wire lines in order, tagged by direction, so an
 * export replays against the service in stdio mode byte-for-byte: feed the
 * "sent" lines, expect exactly the "received" lines back.
 */

export interface TranscriptEntry {
  direction: "sent" | "received";
  line: string;
}

export class Transcript {
  readonly entries: TranscriptEntry[] = [];

  recordSent(line: string): void {
    this.entries.push({ direction: "sent", line });
  }

  recordReceived(line: string): void {
    this.entries.push({ direction: "received", line });
  }

  sentLines(): string[] {
    return this.entries.filter((e) => e.direction === "sent").map((e) => e.line);
  }

  receivedLines(): string[] {
    return this.entries.filter((e) => e.direction === "received").map((e) => e.line);
  }

  /** Export format: one entry per line, "<" = sent to server, ">" = received. */
  export(): string {
    return this.entries
      .map((e) => (e.direction === "sent" ? "< " : "> ") + e.line)
      .join("\n") + "\n";
  }

  static parse(exported: string): Transcript {
    const transcript = new Transcript();
    for (const raw of exported.split("\n")) {
      if (!raw) continue;
      if (raw.startsWith("< ")) transcript.recordSent(raw.slice(2));
      else if (raw.startsWith("> ")) transcript.recordReceived(raw.slice(2));
      else throw new Error(`transcript line has no direction marker: ${raw}`);
    }
    return transcript;
  }
}

/**
 * Compare a replay's output against the recorded one. Returns the first
 * mismatch, or null when the replay is byte-identical.
 */
export function replayMismatch(
  recorded: Transcript,
  replayedOutput: string[],
): { index: number; expected: string | null; got: string | null } | null {
  const expected = recorded.receivedLines();
  const longest = Math.max(expected.length, replayedOutput.length);
  for (let i = 0; i < longest; i++) {
    if (expected[i] !== replayedOutput[i]) {
      return { index: i, expected: expected[i] ?? null, got: replayedOutput[i] ?? null };
    }
  }
  return null;
}
