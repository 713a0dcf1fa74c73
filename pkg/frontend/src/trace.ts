// Trace lookup: which construction steps mention a given skill.

import type { TracePayload, TraceStep } from "./types.js";

export function stepsForSkill(trace: TracePayload, skillId: string): TraceStep[] {
  return trace.steps.filter(
    (step) => step.skill === skillId || step.parent === skillId || step.child === skillId,
  );
}

const CAUSE_TEXT: Record<string, string> = {
  determined_by: "determined by scene element",
  base_graph_of: "member of the base graph of",
  required_by: "required by skill",
  necessitated_by: "necessitated by skill",
};

export function describeStep(step: TraceStep): string {
  const cause = `${CAUSE_TEXT[step.cause.kind] ?? step.cause.kind} '${step.cause.ref}'`;
  if (step.skill !== undefined) {
    return `#${step.index} ${step.action} '${step.skill}' — ${cause}`;
  }
  return `#${step.index} ${step.action} '${step.parent}' -> '${step.child}' (${step.flavor}) — ${cause}`;
}
