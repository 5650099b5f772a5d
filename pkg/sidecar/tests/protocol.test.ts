import { describe, expect, it } from 'vitest';

import {
  LineBuffer,
  RequestError,
  decodeRequest,
  encodeError,
  encodeResponse,
} from '../src/protocol';

function requestLine(id: number, n: number, h: number, w: number, fill = 7): string {
  const frames = Buffer.alloc(n * h * w * 3, fill);
  return JSON.stringify({ id, n, h, w, frames_b64: frames.toString('base64') });
}

describe('decodeRequest', () => {
  it('round-trips a well-formed request', () => {
    const req = decodeRequest(requestLine(5, 2, 4, 4));
    expect(req.id).toBe(5);
    expect(req.frames.length).toBe(2 * 4 * 4 * 3);
    expect(req.frames[0]).toBe(7);
  });

  it('reports id -1 for unparseable lines', () => {
    for (const line of ['not json', '{"n": 1}', '[]', '{"id": "x"}']) {
      try {
        decodeRequest(line);
        expect.unreachable();
      } catch (err) {
        expect(err).toBeInstanceOf(RequestError);
        expect((err as RequestError).requestId).toBe(-1);
      }
    }
  });

  it('keeps the id for payload errors', () => {
    const frames = Buffer.alloc(10).toString('base64');
    const line = JSON.stringify({ id: 3, n: 2, h: 4, w: 4, frames_b64: frames });
    try {
      decodeRequest(line);
      expect.unreachable();
    } catch (err) {
      expect((err as RequestError).requestId).toBe(3);
      expect((err as RequestError).message).toMatch(/10 bytes, declared 96/);
    }
  });

  it('rejects non-positive dimensions', () => {
    const line = JSON.stringify({ id: 1, n: 0, h: 4, w: 4, frames_b64: '' });
    expect(() => decodeRequest(line)).toThrow(/positive/);
  });
});

describe('responses', () => {
  it('are single LF-terminated JSON lines', () => {
    const ok = encodeResponse(2, [0.5, 0.5]);
    expect(ok.endsWith('\n')).toBe(true);
    expect(JSON.parse(ok)).toEqual({ id: 2, probs: [0.5, 0.5] });
    const bad = encodeError(-1, 'boom');
    expect(JSON.parse(bad)).toEqual({ id: -1, error: 'boom' });
  });
});

describe('LineBuffer', () => {
  it('reassembles lines across chunk boundaries', () => {
    const lb = new LineBuffer();
    expect(lb.feed(Buffer.from('{"a":'))).toEqual([]);
    expect(lb.feed(Buffer.from('1}\n{"b":2}\n{"c'))).toEqual(['{"a":1}', '{"b":2}']);
    expect(lb.feed(Buffer.from('":3}\n'))).toEqual(['{"c":3}']);
  });
});
