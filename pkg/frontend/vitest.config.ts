import { defineConfig } from "vitest/config";

export default defineConfig({
  resolve: {
    // sources import with .js suffixes (browser-correct after tsc emit);
    // map them back to the .ts files for the test runner
    alias: [{ find: /^(\.{1,2}\/.*)\.js$/, replacement: "$1" }],
  },
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
  },
});
