// CVE-2024-10233 Quillpad shared-note XSS (inert fixture).
const note = {
  title: "Quarterly plan",
  body: "<img src=x onerror=alert(document.domain)>",
};
console.log(JSON.stringify(note));
