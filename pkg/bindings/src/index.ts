/**
 * Typed bindings for the outlinekit numeric kernels.
 *
 * Everything here is a thin, stateless wrapper over one kernel subprocess:
 * text and plain arrays go in, plain records and scalars come out. Record
 * field names match the kernel wire format exactly, so results compare
 * one-to-one against the primary library's own serialized output.
 */

import {
  KernelError,
  KernelProcess,
  KernelProcessError,
  type KernelOptions,
} from "./kernel.js";

export { KernelError, KernelProcess, KernelProcessError };
export type { KernelOptions };

/** Bounds a generated outline must satisfy to count as well-formed. */
export interface OutlineSchemaSpec {
  max_depth?: number;
  min_top_sections?: number;
  max_top_sections?: number;
  max_heading_chars?: number;
  require_citations_subset?: boolean;
}

/** Costs for the three tree edit operations. */
export interface EditCostSpec {
  insert_cost?: number;
  delete_cost?: number;
  relabel_cost_mode?: "shape_only" | "label_aware";
}

/** Weighting and validation settings captured by a bound reward function. */
export interface RewardSpec {
  /** Weight on the structural reward, in [0, 1]. */
  lambda?: number;
  schema?: OutlineSchemaSpec;
  costs?: EditCostSpec;
}

export interface ParseInfo {
  canonical: string;
  node_count: number;
  section_count: number;
  depth: number;
}

export interface ValidationReport {
  passed: boolean;
  violations: string[];
}

export interface DistanceReport {
  ted: number;
  n_ref: number;
  n_gen: number;
  normalized_distance: number;
  structural_reward: number;
}

export interface RewardBreakdown {
  r_struct: number;
  r_format: number;
  r_total: number;
  lambda_used: number;
}

/** Per-token logprobs under three policies, plus the candidate's reward. */
export interface RolloutCandidate {
  policy_logprobs: number[];
  old_logprobs: number[];
  ref_logprobs: number[];
  reward: number;
}

export interface GrpoSpec {
  epsilon?: number;
  beta?: number;
  std_floor?: number;
}

export interface CandidateDiagnostics {
  ratio: number;
  clipped: boolean;
  kl: number;
}

export interface GrpoResult {
  objective: number;
  loss: number;
  diagnostics: CandidateDiagnostics[];
}

export type NllReduction = "sum" | "token_mean";

/** A reward configuration was rejected at bind time. */
export class ConfigInvalid extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConfigInvalid";
  }
}

// JSON cannot represent NaN or infinities, so non-finite inputs must be
// rejected here rather than silently turning into nulls on the wire.
function assertFinite(name: string, values: readonly number[]): void {
  for (const v of values) {
    if (!Number.isFinite(v)) {
      throw new TypeError(`${name} must contain only finite numbers, got ${v}`);
    }
  }
}

/**
 * Scores one generated outline against a reference, using the reward
 * configuration captured when the function was bound.
 */
export type BoundRewardFn = (
  generated: string,
  reference: string,
  pool?: string[]
) => Promise<RewardBreakdown>;

/**
 * Typed front end over one kernel subprocess.
 *
 * The kernel holds no state between requests, so a single instance can be
 * shared freely: concurrent calls are pipelined and answered in order.
 */
export class OutlineKernel {
  private readonly proc: KernelProcess;

  constructor(options: KernelOptions = {}) {
    this.proc = new KernelProcess(options);
  }

  /** Version of the underlying library; the bindings mirror it. */
  async version(): Promise<string> {
    const result = (await this.proc.request({ op: "version" })) as {
      version: string;
    };
    return result.version;
  }

  /** Parse outline text and report its canonical form and shape counts. */
  async parse(text: string): Promise<ParseInfo> {
    return (await this.proc.request({ op: "parse", text })) as ParseInfo;
  }

  /** Parse outline text and check it against a schema. */
  async validate(
    text: string,
    schema?: OutlineSchemaSpec,
    pool?: string[]
  ): Promise<ValidationReport> {
    return (await this.proc.request({
      op: "validate",
      text,
      schema,
      pool,
    })) as ValidationReport;
  }

  /** Tree edit distance between two outlines given as text. */
  async treeEditDistance(
    a: string,
    b: string,
    costs?: EditCostSpec
  ): Promise<number> {
    const result = (await this.proc.request({ op: "ted", a, b, costs })) as {
      ted: number;
    };
    return result.ted;
  }

  /** Raw, normalized, and reward-form distance between two outlines. */
  async distance(
    gen: string,
    ref: string,
    costs?: EditCostSpec
  ): Promise<DistanceReport> {
    return (await this.proc.request({
      op: "distance",
      gen,
      ref,
      costs,
    })) as DistanceReport;
  }

  /** Structural and format rewards combined with weight lambda. */
  async reward(
    gen: string,
    ref: string,
    spec?: RewardSpec,
    pool?: string[]
  ): Promise<RewardBreakdown> {
    return (await this.proc.request({
      op: "reward",
      gen,
      ref,
      lambda: spec?.lambda,
      schema: spec?.schema,
      costs: spec?.costs,
      pool,
    })) as RewardBreakdown;
  }

  /** Group-normalized advantages: center by mean, scale by floored std. */
  async advantages(rewards: number[], stdFloor?: number): Promise<number[]> {
    assertFinite("rewards", rewards);
    const result = (await this.proc.request({
      op: "advantages",
      rewards,
      std_floor: stdFloor,
    })) as { advantages: number[] };
    return result.advantages;
  }

  /** Clipped-surrogate group objective with a KL penalty. */
  async grpoObjective(
    candidates: RolloutCandidate[],
    spec?: GrpoSpec
  ): Promise<GrpoResult> {
    for (const cand of candidates) {
      assertFinite("policy_logprobs", cand.policy_logprobs);
      assertFinite("old_logprobs", cand.old_logprobs);
      assertFinite("ref_logprobs", cand.ref_logprobs);
      assertFinite("reward", [cand.reward]);
    }
    return (await this.proc.request({
      op: "grpo",
      candidates,
      epsilon: spec?.epsilon,
      beta: spec?.beta,
      std_floor: spec?.std_floor,
    })) as GrpoResult;
  }

  /** Negative log-likelihood of a token logprob sequence. */
  async sftNll(
    logprobs: number[],
    reduction?: NllReduction
  ): Promise<number> {
    assertFinite("logprobs", logprobs);
    const result = (await this.proc.request({
      op: "nll",
      logprobs,
      reduction,
    })) as { nll: number };
    return result.nll;
  }

  /** Stop the subprocess. The instance cannot be used afterwards. */
  close(): Promise<void> {
    return this.proc.close();
  }
}

/**
 * Capture a reward configuration and return a function that scores
 * generated outlines with it.
 *
 * The configuration is validated eagerly by the kernel itself, so the
 * acceptance rules are exactly the primary library's; a rejected
 * configuration raises ConfigInvalid here and the returned function is
 * never produced. The bound function holds only the kernel handle and a
 * frozen copy of the configuration: equal configurations yield
 * interchangeable functions.
 */
export async function bindReward(
  kernel: OutlineKernel,
  config: RewardSpec = {}
): Promise<BoundRewardFn> {
  const frozen: RewardSpec = {
    lambda: config.lambda,
    schema: config.schema === undefined ? undefined : { ...config.schema },
    costs: config.costs === undefined ? undefined : { ...config.costs },
  };
  try {
    // Probe with a minimal outline pair: config objects are constructed
    // before any scoring, so every bad setting surfaces right here.
    await kernel.reward("# a", "# a", frozen);
  } catch (err) {
    if (err instanceof KernelError) {
      throw new ConfigInvalid(err.message);
    }
    throw err;
  }
  return (generated, reference, pool) =>
    kernel.reward(generated, reference, frozen, pool);
}
