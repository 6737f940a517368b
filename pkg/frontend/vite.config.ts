/// <reference types="vitest/config" />
import { defineConfig } from 'vite';

// The annotator is a static bundle; everything under /api is proxied to the
// formlearn service so the dev server and the API share one origin.
export default defineConfig({
  server: {
    port: 5173,
    proxy: {
      '/api': 'http://127.0.0.1:8321',
    },
  },
  build: {
    outDir: 'dist',
    sourcemap: true,
  },
  test: {
    environment: 'node',
    include: ['test/**/*.test.ts'],
  },
});
