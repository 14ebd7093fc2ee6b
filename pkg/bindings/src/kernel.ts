/**
 * Subprocess transport for the outlinekit kernel.
 *
 * The kernel is a long-lived `outlinekit kernel` process speaking
 * newline-delimited JSON on stdin/stdout: one request object per line in,
 * one response object per line out, answered strictly in request order.
 * Responses are either `{"ok": true, "result": ...}` or
 * `{"ok": false, "error": "<ExceptionName>", "message": "..."}`.
 */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";

/** A request failed inside the kernel; `code` is the Python exception name. */
export class KernelError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(`${code}: ${message}`);
    this.name = "KernelError";
    this.code = code;
  }
}

/** The kernel process died or could not be started. */
export class KernelProcessError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "KernelProcessError";
  }
}

export interface KernelOptions {
  /** Interpreter to launch; defaults to $OUTLINEKIT_PYTHON, then "python3". */
  python?: string;
}

interface Pending {
  resolve: (value: unknown) => void;
  reject: (reason: Error) => void;
}

const STDERR_TAIL_CHARS = 2000;

/**
 * One kernel subprocess. Requests may be issued concurrently; they are
 * written immediately and resolved in order as response lines arrive.
 */
export class KernelProcess {
  private readonly child: ChildProcessWithoutNullStreams;
  private readonly pending: Pending[] = [];
  private stdoutBuffer = "";
  private stderrTail = "";
  private exitError: KernelProcessError | null = null;
  private closing = false;
  private readonly exited: Promise<void>;

  constructor(options: KernelOptions = {}) {
    const python =
      options.python ?? process.env.OUTLINEKIT_PYTHON ?? "python3";
    this.child = spawn(python, ["-m", "outlinekit", "kernel"], {
      stdio: ["pipe", "pipe", "pipe"],
    });
    this.child.stdout.setEncoding("utf8");
    this.child.stderr.setEncoding("utf8");

    this.child.stdout.on("data", (chunk: string) => this.onStdout(chunk));
    this.child.stderr.on("data", (chunk: string) => {
      this.stderrTail = (this.stderrTail + chunk).slice(-STDERR_TAIL_CHARS);
    });

    this.exited = new Promise<void>((resolve) => {
      this.child.on("error", (err: Error) => {
        this.failAll(
          new KernelProcessError(`failed to start ${python}: ${err.message}`)
        );
        resolve();
      });
      this.child.on("close", (code: number | null, signal: string | null) => {
        const why =
          signal !== null ? `killed by ${signal}` : `exited with code ${code}`;
        const tail = this.stderrTail.trim();
        this.failAll(
          new KernelProcessError(
            `kernel process ${why}${tail ? `; stderr: ${tail}` : ""}`
          )
        );
        resolve();
      });
    });
  }

  private onStdout(chunk: string): void {
    this.stdoutBuffer += chunk;
    let newline: number;
    while ((newline = this.stdoutBuffer.indexOf("\n")) >= 0) {
      const line = this.stdoutBuffer.slice(0, newline).trim();
      this.stdoutBuffer = this.stdoutBuffer.slice(newline + 1);
      if (!line) {
        continue;
      }
      const waiter = this.pending.shift();
      if (waiter === undefined) {
        // A response with no matching request means the stream is corrupt.
        this.failAll(
          new KernelProcessError(`unexpected kernel output: ${line}`)
        );
        this.child.kill();
        return;
      }
      let parsed: { ok: boolean; result?: unknown; error?: string; message?: string };
      try {
        parsed = JSON.parse(line);
      } catch {
        waiter.reject(
          new KernelProcessError(`kernel emitted invalid JSON: ${line}`)
        );
        continue;
      }
      if (parsed.ok) {
        waiter.resolve(parsed.result);
      } else {
        waiter.reject(
          new KernelError(parsed.error ?? "UnknownError", parsed.message ?? "")
        );
      }
    }
  }

  private failAll(error: KernelProcessError): void {
    if (this.exitError === null) {
      this.exitError = error;
    }
    while (this.pending.length > 0) {
      const waiter = this.pending.shift();
      waiter?.reject(this.exitError);
    }
  }

  /** Send one request object and await its result. */
  request(payload: Record<string, unknown>): Promise<unknown> {
    if (this.exitError !== null) {
      return Promise.reject(this.exitError);
    }
    if (this.closing) {
      return Promise.reject(
        new KernelProcessError("kernel is closing; no new requests accepted")
      );
    }
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.child.stdin.write(JSON.stringify(payload) + "\n");
    });
  }

  /** Stop accepting requests, let in-flight ones finish, and reap the child. */
  async close(): Promise<void> {
    if (this.closing) {
      await this.exited;
      return;
    }
    this.closing = true;
    if (this.exitError === null) {
      this.child.stdin.end();
      const killTimer = setTimeout(() => this.child.kill("SIGKILL"), 5000);
      killTimer.unref();
      await this.exited;
      clearTimeout(killTimer);
    }
  }
}
