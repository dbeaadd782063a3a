// Book chapters are included as doc tests; see book/src/.
