export * from "./api.js";
export * from "./charts.js";
export * from "./color.js";
export * from "./interactions.js";
export * from "./scales.js";
export * from "./state.js";
export * from "./types.js";
