import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // e2e tests boot the backend once per run
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
