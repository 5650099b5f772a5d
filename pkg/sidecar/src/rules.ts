/**
 * Deterministic stub model rules.
 *
 * These mirror the pipeline's in-process mock rules operation for operation
 * so that, for the same window bytes, the stub produces bit-identical float64
 * vectors. Every arithmetic step below is chosen to be exact or to follow the
 * same IEEE-754 evaluation order as the reference implementation.
 */

export type Rule = (frames: Buffer, numClasses: number) => number[];

export function meanPixelBucket(frames: Buffer, numClasses: number): number {
  // byte sum stays far below 2^53, so the accumulator is exact
  let sum = 0;
  for (let i = 0; i < frames.length; i++) {
    sum += frames[i];
  }
  const mean = sum / frames.length;
  return Math.min(Math.floor(mean / 36.0), numClasses - 1);
}

export function smoothedOneHot(index: number, numClasses: number, top = 0.94): number[] {
  if (numClasses === 1) {
    return [1.0];
  }
  const rest = (1.0 - top) / (numClasses - 1);
  const probs = new Array<number>(numClasses).fill(rest);
  probs[index] = top;
  return probs;
}

export function constantUniform(numClasses: number): number[] {
  return new Array<number>(numClasses).fill(1.0 / numClasses);
}

/**
 * Resolve a `--model` argument into a rule function.
 *
 * Supported: `stub:constant-uniform`, `stub:mean-pixel-bucket`,
 * `stub:echo-constant:p1,p2,...`. Anything else throws.
 */
export function resolveRule(model: string, numClasses: number): Rule {
  if (!model.startsWith('stub:')) {
    throw new Error(`unsupported model ${JSON.stringify(model)}; only stub:* rules ship here`);
  }
  const rule = model.slice('stub:'.length);
  if (rule === 'constant-uniform') {
    return (_frames, classes) => constantUniform(classes);
  }
  if (rule === 'mean-pixel-bucket') {
    return (frames, classes) => smoothedOneHot(meanPixelBucket(frames, classes), classes);
  }
  if (rule.startsWith('echo-constant:')) {
    const vector = rule
      .slice('echo-constant:'.length)
      .split(',')
      .map((x) => {
        const v = Number(x);
        if (!Number.isFinite(v)) {
          throw new Error(`echo-constant component ${JSON.stringify(x)} is not a number`);
        }
        return v;
      });
    if (vector.length !== numClasses) {
      throw new Error(`echo-constant vector has ${vector.length} entries, expected ${numClasses}`);
    }
    return () => vector.slice();
  }
  throw new Error(`unknown stub rule ${JSON.stringify(rule)}`);
}
