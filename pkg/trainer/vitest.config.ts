import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // The lambda-comparison suite trains two models in its setup hook.
    testTimeout: 600_000,
    hookTimeout: 600_000,
    fileParallelism: false,
  },
});
