/** Gutter model: fold an analyze result into at most one icon per line.
 *
 * The gateway returns one annotation per diagnostic, in the same order,
 * so the two arrays zip. Several findings can share a line (a dead
 * branch is typically both a contradiction and an always-false arm);
 * they collapse into a single icon that opens a list.
 */
import type { AnalyzeResult, SpanWire } from "./rpc.js";

export type IconKind = "question" | "info";

export interface AnnotationItem {
  ruleId: string;
  category: string;
  severity: "question-worthy" | "info";
  message: string;
  span: SpanWire;
  questionId?: string;
}

export interface AnnotationView {
  line: number;
  iconKind: IconKind;
  items: AnnotationItem[];
}

export function buildAnnotations(analysis: AnalyzeResult): AnnotationView[] {
  const byLine = new Map<number, AnnotationItem[]>();
  analysis.annotations.forEach((annotation, index) => {
    const diagnostic = analysis.diagnostics[index];
    if (!diagnostic) {
      return; // a malformed reply; better no icon than a wrong one
    }
    const item: AnnotationItem = {
      ruleId: diagnostic.rule_id,
      category: diagnostic.category,
      severity: diagnostic.severity,
      message: diagnostic.message,
      span: annotation.span,
      questionId: annotation.question_id,
    };
    const line = annotation.span.start_line;
    const bucket = byLine.get(line);
    if (bucket) {
      bucket.push(item);
    } else {
      byLine.set(line, [item]);
    }
  });
  return [...byLine.entries()]
    .sort(([a], [b]) => a - b)
    .map(([line, items]) => ({
      line,
      iconKind: items.some((i) => i.severity === "question-worthy")
        ? ("question" as const)
        : ("info" as const),
      items,
    }));
}
