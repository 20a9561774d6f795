/** Question card state: which widget a question gets and when the
 * answer it holds is worth submitting.
 *
 * The submit gate mirrors the engine's answer schemas exactly — the
 * card never lets a request leave that the engine would bounce as a
 * schema mismatch. The range widget offers sliders up to 20 with
 * numeric fallback fields for anything larger, plus the "runs forever"
 * checkbox.
 */
import type { QuestionWire } from "./rpc.js";

export const SLIDER_MAX = 20;

export interface RangeWidget {
  kind: "numeric-range";
  lo: number | null;
  hi: number | null;
  infinite: boolean;
}

export interface OptionsWidget {
  kind: "multiple-choice";
  options: string[];
  selected: number | null;
}

export interface YesNoWidget {
  kind: "yes-no";
  selected: boolean | null;
}

export type WidgetState = RangeWidget | OptionsWidget | YesNoWidget;

export interface QuestionCardState {
  question: QuestionWire;
  widget: WidgetState;
  submitted: boolean;
}

export function widgetFor(question: QuestionWire): WidgetState {
  const schema = question.answer_schema;
  switch (schema.type) {
    case "numeric-range":
      return { kind: "numeric-range", lo: null, hi: null, infinite: false };
    case "multiple-choice":
      return {
        kind: "multiple-choice",
        options: schema.options ?? [],
        selected: null,
      };
    case "yes-no":
      return { kind: "yes-no", selected: null };
    default:
      throw new Error(`unknown answer schema: ${schema.type}`);
  }
}

function isCount(value: number | null): value is number {
  return value !== null && Number.isInteger(value) && value >= 0;
}

export function isSubmittable(widget: WidgetState): boolean {
  switch (widget.kind) {
    case "numeric-range":
      if (widget.infinite) {
        return true;
      }
      return isCount(widget.lo) && isCount(widget.hi) && widget.lo <= widget.hi;
    case "multiple-choice":
      return (
        widget.selected !== null &&
        widget.selected >= 0 &&
        widget.selected < widget.options.length
      );
    case "yes-no":
      return widget.selected !== null;
  }
}

/** The wire value for `question.answer`; only call when submittable. */
export function answerValue(widget: WidgetState): unknown {
  switch (widget.kind) {
    case "numeric-range":
      if (widget.infinite) {
        return { lo: 0, hi: 0, infinite: true };
      }
      return { lo: widget.lo, hi: widget.hi, infinite: false };
    case "multiple-choice":
      return widget.selected;
    case "yes-no":
      return widget.selected;
  }
}
