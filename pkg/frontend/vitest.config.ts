import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    testTimeout: 30_000,
    hookTimeout: 40_000,
    // Integration suites bind fixed ports; keep files sequential.
    fileParallelism: false,
  },
});
