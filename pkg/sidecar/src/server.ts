/**
 * Classifier sidecar: TCP server answering NDJSON classification requests
 * with a deterministic stub model.
 *
 * Usage:
 *   node dist/server.js --listen 127.0.0.1:7077 --model stub:mean-pixel-bucket --classes 7
 *
 * Each connection gets its own handler; the stub rules are synchronous, so
 * model invocations are naturally serialized on the event loop. A real model
 * adapter would keep that contract (one invocation at a time) and therefore
 * bound throughput by single-request latency.
 *
 * `--stall` accepts connections and reads requests but never answers; it
 * exists so clients can exercise their timeout path against a live port.
 */

import * as net from 'net';

import { LineBuffer, RequestError, decodeRequest, encodeError, encodeResponse } from './protocol';
import { Rule, resolveRule } from './rules';

export interface SidecarConfig {
  host: string;
  port: number;
  model: string;
  classes: number;
  stall?: boolean;
}

export function parseArgs(argv: string[]): SidecarConfig {
  const cfg: SidecarConfig = {
    host: '127.0.0.1',
    port: 7077,
    model: 'stub:mean-pixel-bucket',
    classes: 7,
    stall: false,
  };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === '--listen') {
      const value = argv[++i];
      const sep = value.lastIndexOf(':');
      if (sep < 0) {
        throw new Error(`--listen expects host:port, got ${JSON.stringify(value)}`);
      }
      cfg.host = value.slice(0, sep);
      cfg.port = Number(value.slice(sep + 1));
      if (!Number.isInteger(cfg.port) || cfg.port < 0 || cfg.port > 65535) {
        throw new Error(`invalid port in ${JSON.stringify(value)}`);
      }
    } else if (arg === '--model') {
      cfg.model = argv[++i];
    } else if (arg === '--classes') {
      cfg.classes = Number(argv[++i]);
      if (!Number.isInteger(cfg.classes) || cfg.classes < 1) {
        throw new Error('--classes must be a positive integer');
      }
    } else if (arg === '--stall') {
      cfg.stall = true;
    } else {
      throw new Error(`unknown argument ${JSON.stringify(arg)}`);
    }
  }
  return cfg;
}

function handleLine(line: string, rule: Rule, classes: number): string {
  let id = -1;
  try {
    const req = decodeRequest(line);
    id = req.id;
    return encodeResponse(req.id, rule(req.frames, classes));
  } catch (err) {
    if (err instanceof RequestError) {
      return encodeError(err.requestId, err.message);
    }
    return encodeError(id, (err as Error).message);
  }
}

export function createSidecarServer(cfg: SidecarConfig): net.Server {
  const rule = resolveRule(cfg.model, cfg.classes);
  return net.createServer((socket) => {
    const lines = new LineBuffer();
    socket.on('data', (chunk) => {
      for (const line of lines.feed(chunk)) {
        if (line.trim() === '') {
          continue;
        }
        if (cfg.stall) {
          continue;
        }
        socket.write(handleLine(line, rule, cfg.classes));
      }
    });
    socket.on('error', () => {
      socket.destroy();
    });
  });
}

export function serve(cfg: SidecarConfig): Promise<net.Server> {
  const server = createSidecarServer(cfg);
  return new Promise((resolve, reject) => {
    server.once('error', reject);
    server.listen(cfg.port, cfg.host, () => {
      const addr = server.address() as net.AddressInfo;
      console.log(`sidecar listening on ${addr.address}:${addr.port}`);
      resolve(server);
    });
  });
}

if (require.main === module) {
  let cfg: SidecarConfig;
  try {
    cfg = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error((err as Error).message);
    process.exit(2);
  }
  serve(cfg).catch((err) => {
    console.error(`cannot listen: ${err.message}`);
    process.exit(1);
  });
}
