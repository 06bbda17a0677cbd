export { EXPECTED_COLUMNS, parseResults, SchemaError } from "./schema.js";
export type { ResultRow } from "./schema.js";
export { KINDS, render } from "./render.js";
export type { Kind, RenderResult } from "./render.js";
export { logLogSlope, mean } from "./stats.js";
export { main } from "./cli.js";
