export * from "./types.js";
export * from "./client.js";
export * from "./timeline.js";
export * from "./attribution.js";
export * from "./whatif.js";
export * from "./console.js";
