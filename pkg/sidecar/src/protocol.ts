/**
 * NDJSON wire protocol: one JSON object per line, UTF-8, LF terminated.
 *
 * Request: {"id", "n", "h", "w", "frames_b64"} where frames_b64 encodes
 * n*h*w*3 RGB bytes, frame-major row-major.
 * Response: {"id", "probs"} on success or {"id", "error"} on failure; an
 * undecodable request is answered with id -1.
 */

export interface DecodedRequest {
  id: number;
  n: number;
  h: number;
  w: number;
  frames: Buffer;
}

export class RequestError extends Error {
  /** id to report back; -1 when the line was not parseable at all */
  readonly requestId: number;

  constructor(message: string, requestId: number) {
    super(message);
    this.requestId = requestId;
  }
}

export function decodeRequest(line: string): DecodedRequest {
  let msg: Record<string, unknown>;
  try {
    msg = JSON.parse(line);
  } catch (err) {
    throw new RequestError(`unparseable request: ${(err as Error).message}`, -1);
  }
  if (typeof msg !== 'object' || msg === null || !Number.isInteger(msg['id'])) {
    throw new RequestError('request carries no integer id', -1);
  }
  const id = msg['id'] as number;
  const n = msg['n'];
  const h = msg['h'];
  const w = msg['w'];
  if (!Number.isInteger(n) || !Number.isInteger(h) || !Number.isInteger(w)) {
    throw new RequestError('n, h, w must be integers', id);
  }
  if ((n as number) <= 0 || (h as number) <= 0 || (w as number) <= 0) {
    throw new RequestError('n, h, w must be positive', id);
  }
  const b64 = msg['frames_b64'];
  if (typeof b64 !== 'string') {
    throw new RequestError('frames_b64 must be a string', id);
  }
  const frames = Buffer.from(b64, 'base64');
  const expected = (n as number) * (h as number) * (w as number) * 3;
  if (frames.length !== expected) {
    throw new RequestError(`payload is ${frames.length} bytes, declared ${expected}`, id);
  }
  return { id, n: n as number, h: h as number, w: w as number, frames };
}

export function encodeResponse(id: number, probs: number[]): string {
  return JSON.stringify({ id, probs }) + '\n';
}

export function encodeError(id: number, error: string): string {
  return JSON.stringify({ id, error }) + '\n';
}

/**
 * Incremental LF-delimited line splitter for a socket stream.
 * Feed chunks, get back complete lines without the terminator.
 */
export class LineBuffer {
  private pending = '';

  feed(chunk: Buffer): string[] {
    this.pending += chunk.toString('utf-8');
    const parts = this.pending.split('\n');
    this.pending = parts.pop() as string;
    return parts;
  }
}
