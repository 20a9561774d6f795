/** JSON-RPC plumbing: the UI's only doorway to the engine.
 *
 * Every request is a single JSON envelope POSTed to `/rpc`; the reply
 * echoes the id and carries exactly one of `result` or `error`. The UI
 * never interprets program behaviour itself — whatever judgment it
 * shows came back through this module.
 */

export interface SpanWire {
  start_line: number;
  start_col: number;
  end_line: number;
  end_col: number;
  start_offset: number;
  end_offset: number;
}

export interface AnnotationWire {
  span: SpanWire;
  question_id?: string;
}

export interface DiagnosticWire {
  rule_id: string;
  category: string;
  severity: "question-worthy" | "info";
  message: string;
  span: SpanWire;
}

export interface AnalyzeResult {
  annotations: AnnotationWire[];
  diagnostics: DiagnosticWire[];
}

export interface QuestionWire {
  question_id: string;
  rule_id: string;
  kind: "NumericRange" | "NumericExact" | "MultipleChoice" | "YesNo";
  prompt: string;
  answer_schema: {
    type: string;
    min?: number;
    infinite_checkbox?: boolean;
    options?: string[];
  };
  topic: string;
  span: SpanWire;
}

export interface ObservationWire {
  kind: string;
  budget?: number;
  text?: string;
  error_kind?: string;
}

export interface ExperimentWire {
  input_queue: string[];
  observation: ObservationWire;
  described: string;
}

export interface ExplanationWire {
  summary: string;
  cause: string;
  experiment: ExperimentWire | null;
  reference: string;
}

export interface AnswerResult {
  verdict: string;
  explanation: ExplanationWire;
}

export interface RunResult {
  status: { code: string; kind?: string; message?: string };
  stdout: string;
  steps_used: number;
  inputs_consumed: number;
}

export interface RemedyResult {
  new_source: string;
}

/** The engine refused the request (stale question, bad params, ...). */
export class RpcError extends Error {
  constructor(readonly code: number, message: string) {
    super(message);
    this.name = "RpcError";
  }
}

/** The request never reached the engine (network down, server gone). */
export class TransportFailure extends Error {
  constructor(message: string) {
    super(message);
    this.name = "TransportFailure";
  }
}

export type RpcTransport = (method: string, params: unknown) => Promise<unknown>;

type FetchLike = (input: string, init: RequestInit) => Promise<Response>;

export function httpTransport(baseUrl = "", fetchFn?: FetchLike): RpcTransport {
  const doFetch: FetchLike =
    fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  let nextId = 0;
  return async (method, params) => {
    nextId += 1;
    const envelope = { id: nextId, method, params };
    let response: Response;
    try {
      response = await doFetch(`${baseUrl}/rpc`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(envelope),
      });
    } catch (cause) {
      throw new TransportFailure(`could not reach the engine: ${String(cause)}`);
    }
    if (!response.ok) {
      throw new TransportFailure(`engine answered HTTP ${response.status}`);
    }
    const reply = (await response.json()) as {
      id: number;
      result?: unknown;
      error?: { code: number; message: string };
    };
    if (reply.error) {
      throw new RpcError(reply.error.code, reply.error.message);
    }
    return reply.result;
  };
}

/** A stale question id: the code changed underneath the card. */
export function isStale(error: unknown): boolean {
  return error instanceof RpcError && (error.code === 404 || error.code === 410);
}
