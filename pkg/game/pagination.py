from rest_framework.pagination import PageNumberPagination


class CustomPagination(PageNumberPagination):
    """
    Page-number pagination where ``page=0`` returns every run at once, so that a whole
    eps sweep can be fetched in one request.
    """
    page_size = 20
    page_size_query_param = 'limit'
    max_page_size = 200

    def paginate_queryset(self, queryset, request, view=None):
        page_number = request.query_params.get(self.page_query_param)

        if page_number and page_number.isdigit() and int(page_number) == 0:
            return None  # DRF skips pagination on None.

        return super().paginate_queryset(queryset, request, view)
