// Quillpad fork, no exploit code.
function render(note) { return note.title; }
module.exports = { render };
