import { defineConfig } from "vitest/config";

// base "./" so the bundle works when the registry serves it from /ui
export default defineConfig({
  base: "./",
  build: {
    outDir: "dist",
    emptyOutDir: true,
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    testTimeout: 30_000,
  },
});
